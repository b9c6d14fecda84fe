import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypcert.characteristics import (
    N_CAP, DiskData, Piecewise1D, QuadrantData, SmoothnessReport, Stacked1D, affine, classify_scalar,
    classify_system, constant, detect_asymptotic_smoothing, euler_wave_coefficients, gaussian, sine,
    smoothness_order, wave_blowup_times,
)
from hypcert.fv import GridSpec, SolverConfig, run_simulation
from hypcert.pde import conserved_from_primitive, make_system

from conftest import random_valid_states

BURG = make_system("burgers1d")
ADV = make_system("advection1d")


def crossing_time(x0, speed):
    """First crossing of adjacent straight characteristics x0 + speed*t."""
    dx = np.diff(x0)
    ds = np.diff(speed)
    with np.errstate(divide="ignore"):
        t = np.where(ds < 0, -dx / ds, np.inf)
    return float(t.min())


def test_burgers_sine_blowup_time():
    u0 = Piecewise1D((0.0, 2 * np.pi), (), (sine([(1.0, 1.0, 0.0)]),))
    rep = classify_scalar(BURG, u0)
    assert rep.classification == "blowup_at"
    assert rep.t_inf[0] == pytest.approx(1.0, rel=1e-6)
    x = np.linspace(0, 2 * np.pi, 10_000)
    oracle = crossing_time(x, np.sin(x))
    assert abs(rep.t_inf[0] - oracle) <= 1e-3 * oracle
    assert rep.flux_case == 2


def test_advection_always_smooth():
    u0 = Piecewise1D((0.0, 2 * np.pi), (), (sine([(1.0, 3.0, 0.2)]),))
    rep = classify_scalar(ADV, u0)
    assert rep.classification == "smooth_forever"
    assert rep.t_inf == [math.inf]
    assert rep.n == N_CAP


def test_monotone_increasing_ramp_smooth_under_burgers():
    rep = classify_scalar(BURG, Piecewise1D((-1.0, 1.0), (), (affine(0.0, 2.0),)))
    assert rep.classification == "smooth_forever"


def test_decreasing_ramp_blows_up_at_inverse_slope():
    rep = classify_scalar(BURG, Piecewise1D((-1.0, 1.0), (), (affine(0.0, -4.0),)))
    assert rep.t_inf[0] == 0.25


def test_riemann_data():
    u0 = Piecewise1D((-1.0, 1.0), (0.0,), (constant(1.0), constant(0.0)))
    assert smoothness_order(u0) == (0, N_CAP)
    rep = classify_scalar(ADV, u0)
    assert rep.classification == "discontinuous_from_start"
    assert rep.discontinuity_count_at_t0 == 1
    assert rep.flux_case == 1
    assert any("per smooth part" in n for n in rep.notes)
    assert classify_scalar(BURG, u0).t_inf == [math.inf]


def test_smoothness_orders():
    assert smoothness_order(Piecewise1D((0.0, 1.0), (), (sine([(1.0, 2.0, 0.0)]),))) == (N_CAP, N_CAP)
    hat = Piecewise1D((-1.0, 1.0), (0.0,), (affine(1.0, 1.0), affine(1.0, -1.0)))
    assert smoothness_order(hat) == (0, N_CAP)
    assert hat.value_jumps == 0
    # C1 join: value and slope match, curvature jumps
    c1 = Piecewise1D((-1.0, 1.0), (0.0,), (affine(0.0, 0.0), sine([(1.0, 1.0, -math.pi / 2)], 1.0)))
    assert c1.jump_order(0) == 2
    assert smoothness_order(c1) == (1, N_CAP)
    limited = Piecewise1D((0.0, 1.0), (), (affine(0.0, 1.0).__class__("affine", (0.0, 1.0), order=3),))
    assert smoothness_order(limited) == (3, 3)


def test_breakpoint_ownership_matches_declared_jumps():
    tophat = Piecewise1D((0.0, 6.0), (2.0, 4.0), (constant(-1.0), constant(3.0), constant(-1.0)),
                         closed_left=(False, True))
    np.testing.assert_array_equal(tophat(np.array([2.0, 4.0, 1.99, 4.01])), [3.0, 3.0, -1.0, -1.0])
    assert tophat.one_sided(0) == (-1.0, 3.0)
    assert tophat.value_jumps == 2


def test_invalid_descriptors():
    with pytest.raises(ValueError):
        Piecewise1D((1.0, 1.0), (), (constant(0.0),))
    with pytest.raises(ValueError):
        Piecewise1D((0.0, 2.0), (1.0, 0.5), (constant(0.0),) * 3)
    with pytest.raises(ValueError):
        Piecewise1D((0.0, 2.0), (1.0,), (constant(0.0),))
    with pytest.raises(ValueError):
        classify_scalar(make_system("euler1d"), Piecewise1D((0.0, 1.0), (), (constant(1.0),)))
    with pytest.raises(ValueError):
        SmoothnessReport("smooth_forever", 8, [1.0], 0)


def test_piece_derivatives_match_finite_differences():
    x = np.linspace(-1, 1, 7)
    for p in (sine([(0.7, 2.0, 0.3), (0.2, 5.0, -1.0)], 0.1), gaussian(1.3, 0.2, 0.4, -0.5), affine(2.0, -3.0)):
        for k in range(1, 4):
            h = 1e-4
            fd = (p.deriv(x + h, k - 1) - p.deriv(x - h, k - 1)) / (2 * h)
            np.testing.assert_allclose(p.deriv(x, k), fd, rtol=1e-6, atol=1e-6)


def random_sine_profile(rng):
    terms = []
    for _ in range(rng.integers(1, 4)):
        terms.append((rng.uniform(0.2, 1.5), float(rng.integers(1, 4)), rng.uniform(0, 2 * np.pi)))
    return sine(terms, rng.uniform(-1, 1))


def test_formula_matches_characteristic_oracle_on_random_profiles():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        p = random_sine_profile(rng)
        u0 = Piecewise1D((0.0, 2 * np.pi), (), (p,))
        t = classify_scalar(BURG, u0).t_inf[0]
        x = np.linspace(0, 2 * np.pi, 10_000)
        oracle = crossing_time(x, p.value(x))
        assert abs(t - oracle) <= 1e-2 * oracle


@settings(max_examples=30, deadline=None)
@given(k=st.floats(1.5, 10.0), amp=st.floats(0.3, 2.0), phase=st.floats(0, 6.28))
def test_blowup_time_scales_with_stretch(k, amp, phase):
    base = Piecewise1D((0.0, 2 * np.pi), (), (sine([(amp, 1.0, phase)]),))
    stretched = Piecewise1D((0.0, 2 * np.pi * k), (), (sine([(amp, 1.0 / k, phase)]),))
    t1 = classify_scalar(BURG, base).t_inf[0]
    t2 = classify_scalar(BURG, stretched).t_inf[0]
    assert t2 == pytest.approx(k * t1, rel=1e-6)


@pytest.mark.parametrize("piece", [affine(-1.0, 0.5), affine(2.0, 0.0), constant(3.0),
                                   sine([(1.0, 1.0, 0.0)]), gaussian(1.0, 2.0, 0.5)])
def test_monotone_data_never_blows_up_under_convex_flux(piece):
    # restrict each catalog piece to an interval where it is non-decreasing
    lo, hi = (-np.pi / 2, np.pi / 2) if piece.form == "sine" else (-3.0, 2.0)
    assert piece.monotone(lo, hi) >= 0
    rep = classify_scalar(BURG, Piecewise1D((lo, hi), (), (piece,)))
    assert rep.classification == "smooth_forever"
    assert rep.t_inf == [math.inf]


# -- systems -------------------------------------------------------------

def test_euler_alpha_closed_form(rng):
    for name in ("euler1d", "euler2d"):
        s = make_system(name, gamma=1.4)
        U = random_valid_states(s, 50, rng)
        alpha, _, _ = euler_wave_coefficients(s, U)
        rho = U[0]
        c = np.sqrt(1.4 * s.pressure(U) / rho)
        np.testing.assert_allclose(alpha[0], -(2.4) * c / (2 * rho), rtol=1e-12)
        np.testing.assert_allclose(alpha[-1], (2.4) * c / (2 * rho), rtol=1e-12)
        np.testing.assert_allclose(alpha[1:-1], 0.0, atol=1e-12)


def test_euler_alpha_against_numerical_eigenvalue_gradient(rng):
    s = make_system("euler1d")
    U = random_valid_states(s, 10, rng)
    alpha, R, _ = euler_wave_coefficients(s, U)
    h = 1e-6
    for i in range(3):
        fd = (s.eigen(U + h * R[:, i], 0)[0][i] - s.eigen(U - h * R[:, i], 0)[0][i]) / (2 * h)
        np.testing.assert_allclose(alpha[i], fd, rtol=1e-6, atol=1e-8)


def test_constant_euler_state_never_blows_up():
    s = make_system("euler1d")
    U0 = Stacked1D(tuple(Piecewise1D((0.0, 1.0), (), (constant(v),)) for v in (1.0, 0.3, 2.5)))
    waves = wave_blowup_times(s, U0)
    assert [w.t_inf for w in waves] == [math.inf] * 3
    assert waves[1].alpha_sign == 0
    assert classify_system(s, U0).classification == "smooth_forever"


def test_sod_report():
    s = make_system("euler1d")
    left, right = (1.0, 0.0, 2.5), (0.125, 0.0, 0.25)
    U0 = Stacked1D(tuple(Piecewise1D((0.0, 1.0), (0.5,), (constant(a), constant(b))) for a, b in zip(left, right)))
    rep = classify_system(s, U0)
    assert rep.classification == "discontinuous_from_start"
    assert rep.discontinuity_count_at_t0 == 1
    assert all(math.isinf(t) for t in rep.t_inf)


def test_simple_wave_acoustic_blowup_matches_tracing():
    # right-moving simple wave: entropy and the 1-Riemann invariant constant, u varies
    g = 1.4
    s = make_system("euler1d", gamma=g)
    x = np.linspace(0.0, 1.0, 20_001)
    u = 0.2 * np.exp(-((x - 0.5) / 0.1) ** 2)
    c = 1.0 + 0.5 * (g - 1) * u  # u - 2c/(g-1) constant
    rho = c ** (2 / (g - 1))
    p = rho * c * c / g
    U = conserved_from_primitive(s, (rho, u, p))
    Ux = np.gradient(U, x, axis=1)
    waves = wave_blowup_times(s, (x, U, Ux))
    oracle = crossing_time(x, u + c)
    assert waves[2].alpha_sign == 1
    assert abs(waves[2].t_inf - oracle) <= 0.05 * oracle
    assert math.isinf(waves[1].t_inf)
    assert waves[0].t_inf > 10 * waves[2].t_inf


def test_two_d_descriptors():
    d = DiskData(((-1, 1), (-1, 1)), (-0.5, -0.5), 0.33, (1.0,), (0.0,))
    X, Y = np.meshgrid(np.array([-0.5, 0.9]), np.array([-0.5]))
    np.testing.assert_array_equal(d(X, Y)[0], [[1.0, 0.0]])
    q = QuadrantData(((0, 1), (0, 1)), (0.8, 0.8), ((1.5, 0, 0, 3.75), (0.5323, 0.641954, 0, 1.1371),
                                                    (0.5323, 0, 0.641954, 1.1371), (0.138, 0.166428, 0.166428, 0.273212)))
    assert q.value_jumps == 4
    assert q(np.array(0.9), np.array(0.1))[2] == 0.641954
    rep = classify_system(make_system("euler2d"), q)
    assert rep.classification == "discontinuous_from_start"


def test_asymptotic_detection_burgers_disk():
    s = make_system("burgers2d")
    g = GridSpec((-1.0, -1.0), (1.0, 1.0), (48, 48))
    d = DiskData(((-1, 1), (-1, 1)), (-0.5, -0.5), 0.33, (1.0,), (0.0,))
    fs = run_simulation(s, g, d, SolverConfig("roe", "none", 0.9, 1.0, 4))
    assert detect_asymptotic_smoothing(s, fs)
    rep = classify_scalar(s, d, fs)
    assert rep.classification == "asymptotically_smooth"


def test_asymptotic_detection_rejects_tophat_and_advection():
    g = GridSpec((0.0,), (6.0,), (256,))
    tophat = Piecewise1D((0.0, 6.0), (2.0, 4.0), (constant(-1.0), constant(3.0), constant(-1.0)))
    fs = run_simulation(BURG, g, tophat, SolverConfig("roe", "none", 0.9, 1.0, 4))
    assert not detect_asymptotic_smoothing(BURG, fs)
    fa = run_simulation(ADV, g, tophat, SolverConfig("roe", "none", 0.9, 1.0, 4))
    assert not detect_asymptotic_smoothing(ADV, fa)


def test_report_round_trip():
    rep = SmoothnessReport("discontinuous_from_start", N_CAP, [math.inf, 0.5], 2, ["x"], 0, 1)
    assert SmoothnessReport.from_dict(rep.to_dict()) == rep

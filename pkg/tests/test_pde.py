import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypcert.pde import (
    InvalidStateError, conserved_from_primitive, make_system, max_wave_speed, primitive_from_conserved,
)

from conftest import random_valid_states


def test_scalar_fluxes():
    assert make_system("advection1d", a=1.0).flux(np.array([2.0]))[0] == 2.0
    assert make_system("burgers1d").flux(np.array([2.0]))[0] == 2.0


def test_euler_pressure_and_eigenvalues():
    s = make_system("euler1d", gamma=1.4)
    U = np.array([1.0, 0.0, 2.5])
    assert s.pressure(U) == pytest.approx(1.0, rel=1e-15)
    lam, _, _ = s.eigen(U)
    np.testing.assert_allclose(lam, [-np.sqrt(1.4), 0.0, np.sqrt(1.4)], rtol=1e-14)
    np.testing.assert_allclose(lam, [-1.18322, 0.0, 1.18322], atol=5e-6)


def test_sod_primitives():
    s = make_system("euler1d")
    np.testing.assert_allclose(primitive_from_conserved(s, [1.0, 0.0, 2.5]), (1.0, 0.0, 1.0), rtol=1e-15)
    np.testing.assert_allclose(primitive_from_conserved(s, [0.125, 0.0, 0.25]), (0.125, 0.0, 0.1), rtol=1e-15)
    assert primitive_from_conserved(make_system("burgers1d"), [0.7])[0] == 0.7


def test_max_wave_speed_examples():
    assert max_wave_speed(make_system("advection1d"), np.array([5.0])) == 1.0
    assert max_wave_speed(make_system("burgers1d"), np.array([-3.0])) == 3.0
    assert max_wave_speed(make_system("euler1d"), np.array([1.0, 0.0, 2.5])) == pytest.approx(np.sqrt(1.4))


def test_errors():
    with pytest.raises(ValueError):
        make_system("maxwell1d")
    with pytest.raises(ValueError):
        make_system("euler1d", gamma=1.0)
    with pytest.raises(ValueError):
        make_system("burgers1d", a=2.0)
    with pytest.raises(InvalidStateError):
        primitive_from_conserved(make_system("euler1d"), [-1.0, 0.0, 2.5])
    with pytest.raises(InvalidStateError):
        make_system("euler1d").max_wave_speed(np.array([1.0, 0.0, -1.0]))
    with pytest.raises(ValueError):
        make_system("euler1d").flux(np.array([1.0, 0.0, 2.5]), direction=1)


def test_validity_predicate():
    s = make_system("euler2d")
    assert s.valid(np.array([1.0, 0.0, 0.0, 2.5]))
    assert not s.valid(np.array([0.0, 0.0, 0.0, 2.5]))
    assert not s.valid(np.array([1.0, 3.0, 0.0, 2.5]))  # kinetic energy exceeds E
    assert not s.valid(np.array([1.0, np.nan, 0.0, 2.5]))


def test_primitive_round_trip(any_system, rng):
    U = random_valid_states(any_system, 200, rng)
    back = conserved_from_primitive(any_system, primitive_from_conserved(any_system, U))
    np.testing.assert_allclose(back, U, rtol=1e-14, atol=0)


def test_jacobian_matches_finite_differences(any_system, rng):
    U = random_valid_states(any_system, 100, rng)
    for d in range(any_system.dim):
        J = any_system.jacobian(U, d)
        for j in range(any_system.m):
            h = 1e-6 * (1.0 + np.abs(U[j]))
            Up, Um = U.copy(), U.copy()
            Up[j] += h
            Um[j] -= h
            fd = (any_system.flux(Up, d) - any_system.flux(Um, d)) / (2 * h)
            np.testing.assert_allclose(J[:, j], fd, rtol=1e-6, atol=1e-7)


def test_directional_derivative(any_system, rng):
    U = random_valid_states(any_system, 100, rng)
    v = rng.normal(size=U.shape)
    for d in range(any_system.dim):
        Jv = np.einsum("ij...,j...->i...", any_system.jacobian(U, d), v)
        h = 1e-6
        fd = (any_system.flux(U + h * v, d) - any_system.flux(U - h * v, d)) / (2 * h)
        np.testing.assert_allclose(Jv, fd, rtol=1e-5, atol=1e-6)


def test_eigen_reconstruction(any_system, rng):
    U = random_valid_states(any_system, 100, rng)
    for d in range(any_system.dim):
        lam, R, L = any_system.eigen(U, d)
        assert np.all(np.isfinite(lam))
        assert np.all(np.diff(lam, axis=0) >= 0)
        if any_system.is_scalar:
            expected = any_system.params.get("a", None)
            np.testing.assert_array_equal(lam[0], U[0] if expected is None else np.full(100, expected))
            continue
        J = any_system.jacobian(U, d)
        for k in range(U.shape[1]):
            Rk, Lk = R[..., k], L[..., k]
            np.testing.assert_allclose(Lk @ Rk, np.eye(any_system.m), atol=1e-12)
            np.testing.assert_allclose(Rk @ np.diag(lam[:, k]) @ Lk, J[..., k], atol=1e-10)


def test_flux_hessian_against_finite_differences(rng):
    s = make_system("euler2d")
    U = random_valid_states(s, 5, rng)
    H = s.flux_hessian(U, 1)
    for k in range(s.m):
        h = 1e-6 * (1 + np.abs(U[k]))
        Up, Um = U.copy(), U.copy()
        Up[k] += h
        Um[k] -= h
        fd = (s.jacobian(Up, 1) - s.jacobian(Um, 1)) / (2 * h)
        np.testing.assert_allclose(H[:, :, k], fd, rtol=1e-5, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(0.01, 100), u=st.floats(-50, 50), p=st.floats(0.01, 100), gamma=st.floats(1.05, 3.0))
def test_euler_eigen_property(rho, u, p, gamma):
    s = make_system("euler1d", gamma=gamma)
    U = conserved_from_primitive(s, (np.array(rho), np.array(u), np.array(p)))
    lam, R, L = s.eigen(U)
    c = np.sqrt(gamma * p / rho)
    np.testing.assert_allclose(lam, [u - c, u, u + c], rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(L @ R, np.eye(3), atol=1e-9)

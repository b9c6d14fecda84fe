import dataclasses
import math

import numpy as np
import pytest

from hypcert.maps import AnalyticMap
from hypcert.neural import (
    BeaconsNet,
    DeepMlp,
    Mlp,
    Normalization,
    OutputScale,
    TrainConfig,
    TrainingError,
    beacons_targets,
    gradient_descent,
    infer,
    init_deep,
    init_mlp,
    load_checkpoint,
    loss_and_grad_residual,
    loss_and_grad_supervised,
    mlp_forward,
    mlp_input_jacobian,
    model_params,
    pde_residual,
    philox,
    save_checkpoint,
    train_beacons,
    train_mlp,
    train_plain,
)
from hypcert.pde import make_system


def fd_grad(fun, theta, h=1e-5):
    g = np.empty_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (fun(theta + e) - fun(theta - e)) / (2 * h)
    return g


def rel_err(a, b):
    scale = max(1e-8, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def single_neuron():
    return Mlp([[1.0]], [0.0], [[1.0]], [0.0])


def euler_friendly(net, sys):
    # keep the probe's outputs in the admissible region (positive density and pressure)
    net.W2 *= 0.05
    net.b2[:] = 0.0
    net.b2[0] = 1.0
    net.b2[-1] = 2.5
    return net


class TestMlp:
    def test_parameter_count(self):
        net = init_mlp(3, 7, 1, philox(0))
        assert net.n_params == 1 + (3 + 2) * 7 == len(net.flat())
        net = init_mlp(2, 5, 4, philox(0))
        assert net.n_params == 4 + (2 + 4 + 1) * 5

    def test_zero_weights(self):
        net = Mlp(np.zeros((4, 2)), np.zeros(4), np.zeros((1, 4)), [0.3])
        assert mlp_forward(net, [0.7, -2.0])[0] == 0.3
        assert np.all(mlp_input_jacobian(net, [0.7, -2.0]) == 0.0)

    def test_single_neuron(self):
        net = single_neuron()
        assert mlp_forward(net, [0.0])[0] == 0.0
        assert mlp_forward(net, [10.0])[0] == pytest.approx(0.9999999958776927, rel=1e-15)
        assert mlp_input_jacobian(net, [0.0])[0, 0] == 1.0

    def test_jacobian_matches_finite_differences(self):
        rng = philox(3)
        for _ in range(5):
            net = init_mlp(3, 6, 2, rng)
            x = rng.uniform(-1, 1, 3)
            J = mlp_input_jacobian(net, x)
            fd = np.empty_like(J)
            for j in range(3):
                h = 1e-6 * (1 + abs(x[j]))
                e = np.zeros(3)
                e[j] = h
                fd[:, j] = (mlp_forward(net, x + e) - mlp_forward(net, x - e)) / (2 * h)
            assert rel_err(J, fd) < 1e-5

    def test_flat_roundtrip(self):
        net = init_mlp(2, 5, 3, philox(1))
        again = net.with_flat(net.flat())
        assert np.array_equal(again.flat(), net.flat())
        with pytest.raises(ValueError):
            net.with_flat(np.zeros(3))

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            Mlp(np.zeros((4, 2)), np.zeros(3), np.zeros((1, 4)), [0.0])
        with pytest.raises(ValueError):
            init_mlp(2, 3, 1, philox(0))(np.zeros((5, 3)))

    def test_init_range(self):
        net = init_mlp(4, 50, 1, philox(9))
        assert np.all(np.abs(net.W1) <= 0.5) and np.all(np.abs(net.W2) <= 1 / math.sqrt(50))


class TestSupervisedLoss:
    def test_zero_residual(self):
        net = init_mlp(2, 4, 1, philox(0))
        X = philox(1).uniform(-1, 1, (6, 2))
        loss, g = loss_and_grad_supervised(net, X, net(X))
        assert loss == 0.0 and np.all(g == 0.0)

    def test_single_sample_quadratic(self):
        net = init_mlp(1, 3, 1, philox(2))
        x = np.array([[0.4]])
        r = 0.25
        loss, g = loss_and_grad_supervised(net, x, net(x) - r)
        assert loss == pytest.approx(r * r, rel=1e-14)
        # d out / d b2 is 1, so that coordinate must be 2 r
        assert g[-1] == pytest.approx(2 * r, rel=1e-14)

    def test_weight_matrix_checks(self):
        net = init_mlp(2, 3, 2, philox(0))
        X = np.zeros((2, 2))
        with pytest.raises(ValueError):
            loss_and_grad_supervised(net, X, np.zeros((2, 2)), W=[[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError):
            loss_and_grad_supervised(net, X, np.zeros((2, 2)), W=[[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            loss_and_grad_supervised(net, X, np.zeros((2, 3)))

    def test_weighted_loss_value(self):
        net = init_mlp(2, 3, 2, philox(0))
        X = philox(4).uniform(-1, 1, (5, 2))
        T = philox(5).uniform(-1, 1, (5, 2))
        W = np.array([[2.0, 0.5], [0.5, 1.0]])
        r = net(X) - T
        loss, _ = loss_and_grad_supervised(net, X, T, W)
        assert loss == pytest.approx(np.mean([ri @ W @ ri for ri in r]), rel=1e-13)

    def test_probe_50_parameters(self):
        net = init_mlp(2, 10, 2, philox(8))
        assert net.n_params == 52
        X = philox(9).uniform(-1, 1, (10, 2))
        T = philox(10).uniform(-1, 1, (10, 2))
        W = np.array([[1.5, 0.2], [0.2, 0.7]])
        _, g = loss_and_grad_supervised(net, X, T, W)
        fd = fd_grad(lambda th: loss_and_grad_supervised(net.with_flat(th), X, T, W)[0], net.flat())
        assert rel_err(g, fd) < 1e-4


SYSTEMS = ["advection1d", "burgers1d", "euler1d", "advection2d", "burgers2d", "euler2d"]


class TestResidualLoss:
    @pytest.mark.parametrize("name", SYSTEMS)
    def test_gradient(self, name):
        sys = make_system(name)
        rng = philox(hash(name) % 1000)
        net = init_mlp(1 + sys.dim, 5, sys.m, rng)
        if sys.kind == "euler":
            euler_friendly(net, sys)
        X = rng.uniform(-1, 1, (8, 1 + sys.dim))
        Xb = rng.uniform(-1, 1, (3, 1 + sys.dim))
        Tb = net(Xb) + 0.1
        W = np.eye(sys.m) * 1.5
        fun = lambda th: loss_and_grad_residual(net.with_flat(th), sys, X, (Xb, Tb), 0.7, 0.4, W)
        _, g = fun(net.flat())
        fd = fd_grad(lambda th: fun(th)[0], net.flat())
        assert rel_err(g, fd) < 1e-4

    def test_constant_net_has_no_residual(self):
        sys = make_system("advection1d")
        net = Mlp(np.zeros((3, 2)), np.zeros(3), np.zeros((1, 3)), [0.8])
        loss, g = loss_and_grad_residual(net, sys, philox(0).uniform(-1, 1, (20, 2)))
        assert loss == 0.0

    def test_travelling_profile(self):
        # u(t, x) = tanh(x - a t) solves u_t + a u_x = 0 exactly
        a = 1.7
        sys = make_system("advection1d", a=a)
        net = Mlp([[-a, 1.0]], [0.0], [[1.0]], [0.0])
        X = philox(2).uniform(-2, 2, (500, 2))
        loss, _ = loss_and_grad_residual(net, sys, X)
        assert loss < 1e-20
        assert np.max(np.abs(pde_residual(net, sys, X))) < 1e-12

    def test_lambda_pde_zero(self):
        sys = make_system("burgers1d")
        net = init_mlp(2, 4, 1, philox(3))
        X = philox(4).uniform(-1, 1, (9, 2))
        Xb = philox(5).uniform(-1, 1, (4, 2))
        Tb = np.zeros((4, 1))
        loss, g = loss_and_grad_residual(net, sys, X, (Xb, Tb), lam_pde=0.0, lam_bc=0.6)
        lb, gb = loss_and_grad_supervised(net, Xb, Tb)
        assert loss == 0.6 * lb
        assert np.array_equal(g, 0.6 * gb + 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            loss_and_grad_residual(init_mlp(2, 3, 1, philox(0)), make_system("euler1d"), np.zeros((2, 2)))


class TestDeepAndProbes:
    def test_deep_gradient(self):
        net = init_deep(2, 4, 6, 2, philox(1))
        X = philox(2).uniform(-1, 1, (7, 2))
        T = philox(3).uniform(-1, 1, (7, 2))
        _, g = net.loss_and_grad(X, T)
        fd = fd_grad(lambda th: net.with_flat(th).loss_and_grad(X, T)[0], net.flat())
        assert rel_err(g, fd) < 1e-4

    def test_twenty_probe_networks(self):
        """Every loss kind on 20 seeded probes: analytic gradient equals central differences."""
        for seed in range(20):
            rng = philox(100 + seed)
            kind = seed % 4
            if kind == 0:
                net = init_mlp(2, 4, 1, rng)
                X, T = rng.uniform(-1, 1, (6, 2)), rng.uniform(-1, 1, (6, 1))
                fun = lambda th: loss_and_grad_supervised(net.with_flat(th), X, T)
            elif kind == 1:
                sys = make_system(SYSTEMS[seed % 6])
                net = init_mlp(1 + sys.dim, 4, sys.m, rng)
                if sys.kind == "euler":
                    euler_friendly(net, sys)
                X = rng.uniform(-1, 1, (6, 1 + sys.dim))
                fun = lambda th: loss_and_grad_residual(net.with_flat(th), sys, X)
            elif kind == 2:
                net = init_deep(2, 3, 4, 1, rng)
                X, T = rng.uniform(-1, 1, (6, 2)), rng.uniform(-1, 1, (6, 1))
                fun = lambda th: net.with_flat(th).loss_and_grad(X, T)
            else:
                sys = make_system("burgers2d")
                net = init_mlp(3, 4, 1, rng)
                X = rng.uniform(-1, 1, (6, 3))
                fun = lambda th: loss_and_grad_residual(net.with_flat(th), sys, X, (X[:2], np.ones((2, 1))))
            _, g = fun(net.flat())
            fd = fd_grad(lambda th: fun(th)[0], net.flat())
            assert rel_err(g, fd) < 1e-4, seed


class TestTraining:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(lr=0)
        with pytest.raises(ValueError):
            TrainConfig(min_epochs=5, max_epochs=3)
        assert TrainConfig().lr == 1e-4

    def test_constant_field(self):
        P = np.stack(np.meshgrid(np.linspace(0, 1, 5), np.linspace(-1, 1, 20)), -1).reshape(-1, 2)
        U = np.full((len(P), 1), 0.7)
        norm = Normalization((0.0, -1.0), (1.0, 1.0))
        model, log = train_plain(P, U, 3, 8, TrainConfig(lr=0.3), norm)
        assert log.history[-1] < 1e-6
        assert np.max(np.abs(infer(model, P) - 0.7)) < 1e-2
        # the bias-only construction is an exact representation
        net = Mlp(np.zeros((1, 2)), [0.0], [[0.0]], [0.7])
        assert loss_and_grad_supervised(net, norm(P), U)[0] == 0.0

    def test_never_stops_before_min_epochs(self):
        cfg = TrainConfig(lr=1e-3, min_epochs=3, max_epochs=10, steps_per_epoch=5, tol=1.0)
        theta, log = gradient_descent(np.zeros(2), lambda th: (float(th @ th), 2 * th), cfg)
        assert log.steps == 2 * 5 + 1 and log.converged

    def test_max_epochs(self):
        cfg = TrainConfig(lr=1e-3, min_epochs=1, max_epochs=4, steps_per_epoch=5, tol=0.0)
        _, log = gradient_descent(np.ones(2), lambda th: (float(th @ th), 2 * th), cfg)
        assert log.steps == 20 and not log.converged and log.monotone
        assert len(log.history) == 5

    def test_non_finite_loss_aborts(self):
        # lr = 1.5 on th^2 multiplies th by -2 each step until it overflows
        cfg = TrainConfig(lr=1.5, min_epochs=1, max_epochs=1, steps_per_epoch=5000)
        with np.errstate(over="ignore", invalid="ignore"), pytest.raises(TrainingError):
            gradient_descent(np.ones(1), lambda th: (float(th @ th), 2 * th), cfg)

    def test_determinism(self):
        rng = philox(7)
        X, T = rng.uniform(-1, 1, (30, 2)), rng.uniform(-1, 1, (30, 1))
        cfg = TrainConfig(lr=0.05, min_epochs=1, max_epochs=2, steps_per_epoch=20)
        a, _ = train_mlp(init_mlp(2, 6, 1, philox(1)), X, T, cfg)
        b, _ = train_mlp(init_mlp(2, 6, 1, philox(1)), X, T, cfg)
        assert a.flat().tobytes() == b.flat().tobytes()


def step_data(n=40, frames=6):
    x = np.linspace(-1, 1, n)
    t = np.linspace(0, 0.3, frames)
    P = np.array([(ti, xi) for ti in t for xi in x])
    U = (P[:, 1] <= P[:, 0]).astype(float)[:, None]
    return P, U


class TestBeacons:
    def test_head_targets_for_step(self):
        fmap = AnalyticMap("arcsinh", 2.0)
        tg = beacons_targets(fmap, np.array([0.0, 1.0, 1.0, 0.0]))
        assert tg[0] == 0.0 and tg[1] == pytest.approx(3.626860407847019, rel=1e-15)
        with pytest.raises(TrainingError):
            beacons_targets(AnalyticMap("tanh", 2.0), np.array([0.0, 0.6]))

    @pytest.mark.parametrize("form,C", [("arcsinh", 2.0), ("arctan", 1.0), ("tanh", 0.5), ("identity", 3.0)])
    def test_target_consistency(self, form, C):
        fmap = AnalyticMap(form, C)
        u = philox(1).uniform(0, 1, 1000)
        assert np.max(np.abs(fmap(beacons_targets(fmap, u)) - u)) < 1e-12

    @pytest.fixture(scope="class")
    @staticmethod
    def trained():
        P, U = step_data()
        norm = Normalization((0.0, -1.0), (0.3, 1.0))
        cfg = TrainConfig(lr=0.1, min_epochs=1, max_epochs=2, steps_per_epoch=50, seed=4)
        model, logs = train_beacons(P, U, 6, 8, [AnalyticMap("arcsinh", 2.0)], cfg, norm)
        return P, U, model, logs, cfg, norm

    def test_structure(self, trained):
        P, U, model, logs, cfg, norm = trained
        chain = model.chains[0]
        assert len(chain.smooth) == 2 and len(chain.stage_errors) == 3
        assert all(np.isfinite(chain.stage_errors))

    def test_inference_reproduces_training_time_prediction(self, trained):
        P, U, model, *_ = trained
        a = infer(model, P)
        b = infer(model, P)
        assert a.tobytes() == b.tobytes()
        stages = model.chains[0].stages(model.norm(P))
        assert np.array_equal(a[:, 0], model.scale.backward(stages[-1][:, None])[:, 0])

    def test_extrapolation_bounded(self, trained):
        P, U, model, *_ = trained
        far = np.column_stack([np.full(50, 0.9), np.linspace(-1, 1, 50)])
        v = model.predict_scaled(far)
        assert np.all(np.isfinite(v))
        assert np.all(np.abs(v[:, 0]) <= model.chains[0].output_bound())

    def test_output_clamp_never_increases_error(self, trained):
        P, U, model, *_ = trained
        chain = model.chains[0]
        far = np.column_stack([np.linspace(0, 3, 400), np.linspace(-3, 3, 400)])
        Xn = model.norm(far)
        loose = dataclasses.replace(chain, out_range=(-np.inf, np.inf))
        clamped, raw = chain(Xn), loose(Xn)
        assert np.all((clamped >= 0) & (clamped <= 1))
        for u in np.linspace(0, 1, 21):
            assert np.all(np.abs(clamped - u) <= np.abs(raw - u))

    def test_smooth_stage_inputs_stay_in_training_range(self, trained):
        P, U, model, *_ = trained
        chain = model.chains[0]
        far = np.column_stack([np.full(100, 5.0), np.linspace(-4, 4, 100)])
        outs = chain.stages(model.norm(far))
        lo, hi = chain.input_ranges[0]
        assert len(chain.input_ranges) == len(chain.smooth)
        # the first smooth stage evaluates exactly its clamped input
        np.testing.assert_array_equal(outs[2], chain.smooth[0](np.clip(outs[1], lo, hi)[:, None])[:, 0])

    def test_identity_chain_equals_mlp_composition(self):
        P, U = step_data(10, 3)
        norm = Normalization((0.0, -1.0), (0.3, 1.0))
        cfg = TrainConfig(lr=0.1, min_epochs=1, max_epochs=1, steps_per_epoch=5)
        model, _ = train_beacons(P, U, 4, 5, [AnalyticMap("identity", 1.0)], cfg, norm)
        c = model.chains[0]
        Xn = norm(P)
        direct = c.smooth[0](c.head(Xn))[:, 0]
        assert np.array_equal(c(Xn), direct)

    def test_determinism(self, trained):
        P, U, model, logs, cfg, norm = trained
        again, _ = train_beacons(P, U, 6, 8, [AnalyticMap("arcsinh", 2.0)], cfg, norm)
        assert model_params(again).tobytes() == model_params(model).tobytes()

    def test_checkpoint_roundtrip(self, trained, tmp_path):
        P, U, model, *_ = trained
        save_checkpoint(model, tmp_path / "b.json", seed=4)
        back = load_checkpoint(tmp_path / "b.json")
        assert isinstance(back, BeaconsNet)
        assert model_params(back).tobytes() == model_params(model).tobytes()
        assert infer(back, P).tobytes() == infer(model, P).tobytes()

    def test_plain_checkpoint_roundtrip(self, tmp_path):
        P, U = step_data(10, 3)
        norm = Normalization((0.0, -1.0), (0.3, 1.0))
        model, _ = train_plain(P, U, 3, 4, TrainConfig(lr=0.1, max_epochs=1, min_epochs=1, steps_per_epoch=3), norm)
        save_checkpoint(model, tmp_path / "p.json")
        back = load_checkpoint(tmp_path / "p.json")
        assert isinstance(back.net, DeepMlp)
        assert infer(back, P).tobytes() == infer(model, P).tobytes()

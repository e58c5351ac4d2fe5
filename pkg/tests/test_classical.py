import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import DOM, inverse_bias_instance, lemma_instance, random_increasing_p1
from lowrank_entropy.classical import (TransportedSubspace, build_2layer, build_classical_lrnr,
                                       check_admissible, compose_left_inverse, ibtrick_compose,
                                       step_sum_p1)
from lowrank_entropy.errors import NotAdmissible, ShockBeforeHorizon
from lowrank_entropy.flux import burgers
from lowrank_entropy.lrnr import affinity_residual, dof_count, forward, layer_rank
from lowrank_entropy.oracle import classical_solution
from lowrank_entropy.presets import bump
from lowrank_entropy.pwlin import (Interval, PiecewiseConstantFn as P0, PiecewiseLinearFn as P1,
                                   l1_distance, rho_eps, total_variation)

ID = P1([-1.0, 2.0], [-1.0, 2.0])


class TestAdmissible:
    def test_identity(self):
        ok, lo, hi, _ = check_admissible((ID,), ((1.0, 1.0),), DOM)
        assert ok and lo == pytest.approx(1.0) and hi == pytest.approx(1.0)

    def test_negative_corner_slope(self):
        phi2 = P1([-1.0, 0.5, 2.0], [0.0, -3.0, -3.0])  # slope -2 on the left piece
        ok, lo, _, diag = check_admissible((ID, phi2), ((1.0, 1.0), (0.0, 1.0)), DOM)
        assert not ok and lo == pytest.approx(-1.0)
        assert any(d["alpha"] == [1.0, 1.0] and d["min_slope"] < 0 for d in diag)

    def test_classical_pair_constant(self):
        K, T = 256, 0.2
        X = np.linspace(0, 1, K + 1)
        u0 = bump()
        phi = (P1(X, X), P1(X, u0(X)))
        ok, lo, _, _ = check_admissible(phi, ((1.0, 1.0), (0.0, T)), Interval(0.0, 1.0))
        assert ok
        assert lo == pytest.approx(1 - T * np.pi, abs=1e-3)  # max |d/dx sin^2(pi x)| = pi


class TestInverseBias:
    def test_relocation_example(self):
        g = P1([0.0, 1.0], [0.0, 2.0])
        h = compose_left_inverse(P0([0.3], [0.0, 1.0]), g, Interval(0.0, 2.0))
        np.testing.assert_allclose(h.breakpoints, [0.6])
        small = ibtrick_compose([1.0], [0.3], 1e-9, g)
        assert small(0.6 - 1e-6) == 0.0 and small(0.6 + 1e-6) == 1.0

    def test_identity_leaves_f(self):
        x, c, eps = np.array([0.2, 0.5]), np.array([1.0, -2.0]), 0.05
        h = ibtrick_compose(c, x, eps, ID)
        z = np.linspace(0, 1, 101)
        np.testing.assert_allclose(h(z), rho_eps(eps, z[:, None] - x) @ c, atol=1e-14)

    @given(st.integers(0, 2**31))
    def test_hard_step_identity(self, seed):
        assert inverse_bias_instance(np.random.default_rng(seed)) == 0

    @given(st.integers(0, 2**31))
    def test_lemma_bound(self, seed):
        measured, bound = lemma_instance(np.random.default_rng(seed))
        assert measured <= bound * (1 + 1e-9) + 1e-14


class TestTwoLayer:
    def test_single_step_gadget(self):
        x1, eps, a = 0.3, 0.05, 1.7
        ts = TransportedSubspace((ID,), (P0([x1], [0.0, 1.0]),), ((a, a),), ((1.0, 1.0),), DOM)
        model, mu = build_2layer(ts, eps, [a], [1.0])
        z = np.linspace(0, 1, 201)
        np.testing.assert_allclose(forward(model, z, 0.0), rho_eps(eps, z - a * x1), atol=1e-13)
        assert mu([a], [1.0]) == {"gamma1": [1.0], "gamma2": [1.0, 0.0], "theta1": [a, 1.0], "theta2": []}

    def test_rejects_inadmissible(self):
        phi2 = P1([-1.0, 0.5, 2.0], [0.0, -3.0, -3.0])
        ts = TransportedSubspace((ID, phi2), (P0([0.5], [0, 1]),), ((1.0, 1.0), (0.0, 1.0)), ((1.0, 1.0),), DOM)
        with pytest.raises(NotAdmissible):
            build_2layer(ts, 0.01, [1.0, 0.0], [1.0])

    @given(st.integers(0, 2**31))
    @settings(max_examples=25)
    def test_error_bound_random(self, seed):
        rng = np.random.default_rng(seed)
        phi2 = P1(np.linspace(-1, 2, 7), rng.uniform(-0.2, 0.2, 7))  # slopes within +-0.4
        phi = (ID, phi2)
        xs = np.sort(rng.choice(np.linspace(0.05, 0.95, 91), size=6, replace=False))
        psi = (P0(xs[:3], np.concatenate([[0.0], np.cumsum(rng.normal(size=3))])),
               P0(xs[3:], np.concatenate([[0.0], np.cumsum(rng.normal(size=3))])))
        ts = TransportedSubspace(phi, psi, ((1.0, 1.0), (-1.0, 1.0)), ((-2.0, 2.0), (-2.0, 2.0)), DOM)
        alpha = [1.0, float(rng.uniform(-1, 1))]
        beta = rng.uniform(-2, 2, 2)
        g = ts.g(alpha)
        centers = np.sort(g(ts.grid))
        eps = 0.4 * float(np.min(np.diff(centers)))
        model, _ = build_2layer(ts, eps, alpha, beta)
        steps = beta @ ts.step_coefficients()
        h_p1 = step_sum_p1(steps, g(ts.grid), eps)
        z = np.linspace(0, 1, 301)
        np.testing.assert_allclose(forward(model, z, 0.0), h_p1(z), atol=1e-12)
        f = P0(ts.grid, np.concatenate([[0.0], np.cumsum(steps)]))
        err = l1_distance(compose_left_inverse(f, g, DOM), h_p1, DOM)
        bound = sum(total_variation(p) for p in psi) * np.max(np.abs(beta)) * eps / 4
        assert err <= bound * (1 + 1e-9)
        assert max(layer_rank(model, l) for l in (1, 2)) <= 2


class TestClassicalBuilder:
    u0 = staticmethod(bump())

    def test_shape_and_rank(self):
        cb = build_classical_lrnr(self.u0, burgers(), 0.2, 32)
        assert cb.model.depth == 2 and cb.model.rank == 3
        assert max(layer_rank(cb.model, l, (0.0, 0.1, 0.2)) for l in (1, 2)) <= 3
        assert affinity_residual(cb.model, (0.0, 0.05, 0.2)) <= 1e-12

    def test_initial_fit(self):
        K = 64
        cb = build_classical_lrnr(self.u0, burgers(), 0.2, K)
        z = np.linspace(0, 1, 513)
        np.testing.assert_allclose(forward(cb.model, z, 0.0), step_sum_p1(cb.steps, cb.grid, cb.eps)(z), atol=1e-13)
        x = (np.arange(20000) + 0.5) / 20000
        err = np.mean(np.abs(self.u0(x) - forward(cb.model, x, 0.0)))
        assert err <= 1.0 * 2 * (cb.eps / 4 + 1.0 / K)  # TV(u0) = 2

    def test_dof_linear(self):
        d = [dof_count(build_classical_lrnr(self.u0, burgers(), 0.2, K).model) for K in (16, 32, 64)]
        assert max(di / K for di, K in zip(d, (16, 32, 64))) <= 4.0

    def test_rate_at_horizon(self):
        errs = []
        for K in (16, 32, 64, 128):
            cb = build_classical_lrnr(self.u0, burgers(), 0.2, K)
            x = (np.arange(8192) + 0.5) / 8192
            exact = classical_solution(self.u0, burgers(), x, 0.2)
            errs.append(np.mean(np.abs(forward(cb.model, x, 0.2) - exact)))
        slope = np.polyfit(np.log([16, 32, 64, 128]), np.log(errs), 1)[0]
        assert slope <= -0.8
        assert max(e * K for e, K in zip(errs, (16, 32, 64, 128))) <= 1.0

    def test_shock_before_horizon(self):
        with pytest.raises(ShockBeforeHorizon):
            build_classical_lrnr(self.u0, burgers(), 0.5, 64)

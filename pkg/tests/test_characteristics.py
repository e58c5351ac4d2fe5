import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import problem
from lowrank_entropy.characteristics import (build_shock_table, endpoints, entropy_eval,
                                             extend_initial, relief_eval, shock_time, xhat)
from lowrank_entropy.errors import InvalidCx, NotAdmissible, NotInShock, OutOfDomain
from lowrank_entropy.flux import burgers, cosh_flux
from lowrank_entropy.oracle import LaxOleinikOracle
from lowrank_entropy.presets import SHOCK_PRESETS
from lowrank_entropy.pwlin import PiecewiseConstantFn as P0, positive_variation, total_variation

B = burgers()


def setup(bp, vals, T=0.5, n_grid=512, flux=B):
    u0 = P0(bp, vals)
    o = LaxOleinikOracle(u0, flux, T)
    ext = extend_initial(u0, flux)
    return u0, o, ext, build_shock_table(ext, o, n_grid=n_grid)


class TestExtension:
    def test_single_fan_length(self):
        ext = extend_initial(P0([0.2, 0.4], [0, 1, 0]), B)
        assert ext.ext_length == pytest.approx(2.0)
        assert len(ext.gammas) == 1 and ext.fan_widths[0] == pytest.approx(1.0)

    def test_fan_values_linear_for_burgers(self):
        ext = extend_initial(P0([0.3, 0.6], [0, -1, 0]), B)
        (lo, hi), = ext.gammas
        z = np.linspace(lo, hi, 11)
        np.testing.assert_allclose(ext.u0_hat(z), np.linspace(-1, 0, 11), atol=1e-12)
        assert ext.fan_speeds == [(-1.0, 0.0)]

    def test_stationary_jump_inventory(self):
        ext = extend_initial(P0([0.0, 0.5, 1.0], [0, 1, -1, 0]), B)
        np.testing.assert_allclose(ext.fan_origins, [0.0, 1.0])
        np.testing.assert_allclose(ext.fan_widths, [1.0, 1.0])

    @pytest.mark.parametrize("bad", [([0.5], [1.0, 0.0]), ([-0.1, 0.5], [0, 1, 0]), ([0.2, 1.3], [0, 1, 0])])
    def test_not_admissible(self, bad):
        with pytest.raises(NotAdmissible):
            extend_initial(P0(*bad), B)

    @pytest.mark.parametrize("name", SHOCK_PRESETS)
    def test_invariants(self, name):
        p = problem(name)
        ext = p.ext
        assert ext.ext_length - 1.0 == pytest.approx(positive_variation(p.u0), abs=1e-14)
        assert ext.u0_hat_total_variation() == pytest.approx(total_variation(p.u0), abs=1e-10)
        s = ext.i_hat.slopes()
        assert set(np.round(s, 12)) <= {0.0, 1.0}
        for lo, hi in ext.gammas:
            mid = 0.5 * (lo + hi)
            assert ext.i_hat(hi) - ext.i_hat(lo) == pytest.approx(0.0, abs=1e-14)
            assert mid == pytest.approx(mid)
        x = np.linspace(0.013, 0.987, 77)
        x = x[np.min(np.abs(x[:, None] - p.u0.breakpoints[None, :]), axis=1) > 1e-6]
        np.testing.assert_allclose(ext.u0_hat(ext.iota(x)), p.u0(x), atol=1e-12)
        assert ext.i_hat(0.0) == 0.0

    def test_no_positive_jumps_in_u0_hat(self):
        ext = problem("shock_rarefaction").ext
        z = np.linspace(ext.ext_dom.lo, ext.ext_dom.hi, 4001)
        assert np.all(np.diff(ext.u0_hat(z)) <= 1e-3)  # only down jumps and gentle fan slopes

    def test_xhat0_examples(self):
        ext = extend_initial(P0([0.3, 0.6], [0, -1, 0]), B)
        z = np.linspace(ext.ext_dom.lo, ext.ext_dom.hi, 13)
        np.testing.assert_allclose(ext.xhat0(z, 0.0), ext.i_hat(z))
        (lo, hi), = ext.gammas
        mid = 0.5 * (lo + hi)
        assert ext.xhat0(mid, 0.2) == pytest.approx(ext.i_hat(mid) - 0.5 * 0.2)
        zc = ext.iota(0.45)  # u0 = -1 there
        assert ext.xhat0(zc, 0.2) == pytest.approx(0.45 - 0.2)

    def test_xhat0_straight_line(self):
        ext = extend_initial(P0([0.2, 0.4], [0, 1, 0]), B)
        z = ext.iota(0.3)
        assert ext.i_hat(z) == pytest.approx(0.3)
        assert ext.xhat0(z, 0.2) == pytest.approx(0.5)

    def test_out_of_domain(self):
        ext = extend_initial(P0([0.2, 0.4], [0, 1, 0]), B)
        with pytest.raises(OutOfDomain):
            ext.xhat0(5.0, 0.1)

    def test_json(self):
        d = json.loads(json.dumps(problem("stationary_shock").ext.to_json(), allow_nan=False))
        assert d["ext_dom"][1] - d["ext_dom"][0] == pytest.approx(3.0)


class TestShockTime:
    def test_zero_data(self):
        _, o, ext, tab = setup([], [0.0], n_grid=8)
        assert np.all(tab.lambda_vals == tab.sentinel)

    def test_block_line_intersection(self):
        _, o, ext, _ = setup([0.0, 0.4], [0, 1, 0])
        ys = np.array([0.25, 0.3, 0.35])
        np.testing.assert_allclose(shock_time(ext, o, ext.iota(ys)), 2 * (0.4 - ys), atol=1e-7)

    def test_merge_catch_up(self, merge):
        # the characteristic from 0.3 reaches the merge point (0.5, 0.2) and then runs along
        # the merged shock at the same speed, so 0.2 is the limit from either side
        d = np.array([-0.02, -0.005, 0.005, 0.02])
        lam = shock_time(merge.ext, merge.oracle, merge.ext.iota(0.3 + d))
        np.testing.assert_allclose(lam, 0.2 - 2 * np.abs(d), atol=1e-7)

    def test_stationary_v_shape(self, stationary):
        # both states move at unit speed toward the standing shock, so lambda = |z - z_c|
        ext, tab = stationary.ext, stationary.table
        zc = float(ext.iota(0.5))
        near = np.abs(tab.grid - zc) < 0.3
        np.testing.assert_allclose(tab.lambda_vals[near], np.abs(tab.grid[near] - zc), atol=1e-7)

    @pytest.mark.parametrize("name", SHOCK_PRESETS)
    def test_level_sets_nested(self, name):
        p = problem(name)
        ts = np.linspace(0.0, p.T, 41)
        sets = [p.table.level_set(t) for t in ts]
        assert all(np.all(a <= b) for a, b in zip(sets, sets[1:]))

    def test_merge_level_sets_direct(self, merge):
        from lowrank_entropy.characteristics import _alive_z
        ts = [0.05, 0.1, 0.2, 0.25]
        dead = [~_alive_z(merge.ext, merge.oracle, merge.table.grid, t) for t in ts]
        assert all(np.all(a <= b) for a, b in zip(dead, dead[1:]))

    def test_lambda_continuity_loose(self, merge):
        lam = np.minimum(merge.table.lambda_vals, merge.table.sentinel)
        finite = lam <= merge.T
        both = finite[1:] & finite[:-1]
        dz = np.diff(merge.table.grid)
        assert np.all(np.abs(np.diff(lam))[both] <= 10 * dz[both] + 1e-6)


class TestEndpointsAndXhat:
    def test_stationary_endpoints(self, stationary):
        ext, tab = stationary.ext, stationary.table
        zc = float(ext.iota(0.5))
        for t in (0.1, 0.2, 0.3):
            a, b = endpoints(ext, tab, zc, t)
            assert a == pytest.approx(zc - t, abs=1e-8) and b == pytest.approx(zc + t, abs=1e-8)

    def test_block_left_endpoint(self):
        _, o, ext, tab = setup([0.0, 0.4], [0, 1, 0])
        a, _ = endpoints(ext, tab, ext.iota(0.35), 0.2)
        assert a == pytest.approx(ext.iota(0.3), abs=1e-8)

    def test_not_in_shock(self, merge):
        with pytest.raises(NotInShock):
            endpoints(merge.ext, merge.table, merge.ext.iota(0.1), 0.01)

    def test_no_shock_xhat_is_xhat0(self):
        _, o, ext, tab = setup([], [0.0])
        z = np.linspace(ext.ext_dom.lo, ext.ext_dom.hi, 101)
        np.testing.assert_allclose(xhat(ext, tab, z, 0.3), ext.xhat0(z, 0.3), atol=1e-12)

    def test_stationary_plateau(self, stationary):
        ext, tab = stationary.ext, stationary.table
        zc = float(ext.iota(0.5))
        z = np.linspace(zc - 0.2, zc + 0.2, 41)
        np.testing.assert_allclose(xhat(ext, tab, z, 0.2), 0.5, atol=1e-9)

    @pytest.mark.parametrize("name", SHOCK_PRESETS)
    def test_monotone_continuous_lipschitz(self, name):
        p = problem(name)
        z = np.linspace(p.ext.ext_dom.lo, p.ext.ext_dom.hi, 1001)
        bound = 1 + p.T * 1.0 * total_variation(p.u0)
        for t in np.linspace(0.0, p.T, 9):
            X = xhat(p.ext, p.table, z, t)
            d = np.diff(X) / np.diff(z)
            assert np.all(d >= -1e-9) and np.all(d <= bound + 1e-6)

    @pytest.mark.parametrize("name", SHOCK_PRESETS)
    def test_initial_map_is_embedding(self, name):
        p = problem(name)
        z = np.linspace(p.ext.ext_dom.lo, p.ext.ext_dom.hi, 301)
        np.testing.assert_allclose(xhat(p.ext, p.table, z, 0.0), p.ext.i_hat(z), atol=1e-12)


class TestEntropyEval:
    def test_initial_values(self, merge):
        x = np.array([0.1, 0.3, 0.7])
        np.testing.assert_allclose(entropy_eval(merge.ext, merge.table, x, 0.0), merge.u0(x))

    def test_fan_interior(self):
        _, o, ext, tab = setup([0.2, 0.7], [0, 1, 0])
        assert entropy_eval(ext, tab, 0.25, 0.1) == pytest.approx(0.5)

    def test_merge_grid_against_oracle(self, merge):
        x = (np.arange(256) + 0.5) / 256
        for t in np.linspace(merge.T / 16, merge.T, 16):
            diff = np.abs(entropy_eval(merge.ext, merge.table, x, t) - merge.oracle.solution(x, t))
            assert np.mean(diff) <= 1e-6

    def test_relief_equals_entropy_without_shocks(self):
        _, o, ext, tab = setup([], [0.0])
        x = np.linspace(0, 1, 101)
        np.testing.assert_allclose(relief_eval(ext, tab, x, 0.3, ext.ext_length),
                                   entropy_eval(ext, tab, x, 0.3), atol=1e-12)

    def test_relief_stationary_both_sides(self, stationary):
        ext, tab = stationary.ext, stationary.table
        x = np.array([0.45, 0.49, 0.51, 0.55])
        np.testing.assert_allclose(relief_eval(ext, tab, x, 0.2, ext.ext_length),
                                   entropy_eval(ext, tab, x, 0.2), atol=1e-12)

    def test_relief_doubled_shift_against_oracle(self, merge):
        x = (np.arange(128) + 0.5) / 128
        for t in np.linspace(merge.T / 8, merge.T, 8):
            r = relief_eval(merge.ext, merge.table, x, t, 2 * merge.ext.ext_length)
            assert np.mean(np.abs(r - merge.oracle.solution(x, t))) <= 1e-5

    def test_invalid_cx(self, merge):
        with pytest.raises(InvalidCx):
            relief_eval(merge.ext, merge.table, 0.5, 0.1, 0.5 * merge.ext.ext_length)


@st.composite
def random_problem(draw):
    m = draw(st.integers(2, 5))
    bp = np.linspace(0.1, 0.9, m) + np.array(draw(st.lists(st.floats(-0.03, 0.03), min_size=m, max_size=m)))
    inner = draw(st.lists(st.sampled_from([-1.0, -0.5, 0.5, 1.0, 1.5]), min_size=m - 1, max_size=m - 1))
    return bp, [0.0] + inner + [0.0]


@given(random_problem(), st.floats(0.02, 0.2))
def test_entropy_eval_matches_oracle_random(data, t):
    bp, vals = data
    _, o, ext, tab = setup(bp, vals, T=0.2, n_grid=128)
    x = (np.arange(200) + 0.5) / 200
    assert np.mean(np.abs(entropy_eval(ext, tab, x, t) - o.solution(x, t))) <= 1e-6


def test_other_flux_against_oracle():
    q = cosh_flux()
    _, o, ext, tab = setup([0.2, 0.5, 0.7], [0.0, 1.5, -0.5, 0.0], T=0.1, flux=q)
    x = (np.arange(300) + 0.5) / 300
    for t in (0.03, 0.1):
        assert np.mean(np.abs(entropy_eval(ext, tab, x, t) - o.solution(x, t))) <= 1e-6

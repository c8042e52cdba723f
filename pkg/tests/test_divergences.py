import math

import numpy as np
import pytest

from conftest import random_density
from oracles import dmax_diagonal_eps0, dmin_diagonal_lp, hoeffding_diagonal_grid, segment_geometry_1d
from uncertain_thermo.divergences import (
    d_max,
    d_max_pair,
    d_max_segment,
    d_min,
    d_min_constrained,
    hoeffding,
    trace_quasi,
    umegaki,
    zero_error_threshold,
)
from uncertain_thermo.errors import BackendUnavailable, BadParameter, DimMismatch
from uncertain_thermo.gibbs import battery_gibbs
from uncertain_thermo.operators import projector, tensor_power
from uncertain_thermo.sets import Sampler, StateSet, materialize

K1 = projector(1, 2).matrix
PI2, PI3 = battery_gibbs(2).matrix, battery_gibbs(3).matrix


def S(*states, hull="finite"):
    return StateSet.from_states(list(states), hull=hull)


class TestDmin:
    def test_battery(self):
        r = d_min(S(K1), S(PI2), 0.1)
        assert r.value == pytest.approx(-math.log2(0.45), abs=1e-7)
        t = r.test.matrix
        assert np.linalg.eigvalsh(t).min() >= -1e-8 and np.linalg.eigvalsh(t).max() <= 1 + 1e-8

    def test_faithful(self, rng):
        rho = random_density(rng, 3)
        assert d_min(S(rho), S(rho), 0.3).value == pytest.approx(-math.log2(0.7), abs=1e-6)

    def test_battery_pair_matches_diagonal_oracle(self):
        val = d_min(S(K1), S(PI2, PI3), 0.1).value
        assert val == pytest.approx(dmin_diagonal_lp([np.array([0, 1.0])], [np.array([.5, .5]), np.array([2 / 3, 1 / 3])], 0.1), abs=1e-7)
        assert val == pytest.approx(1.1520030934523, abs=1e-7)

    def test_zero_type2_is_infinite(self):
        r = d_min(S(K1), S(projector(0, 2).matrix), 0.0)
        assert r.value == math.inf and r.status == "infinite"

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            d_min(S(K1), S(np.eye(3) / 3), 0.1)

    @pytest.mark.parametrize("eps", [-0.1, 1.0])
    def test_eps_range(self, eps):
        with pytest.raises(BadParameter):
            d_min(S(K1), S(PI2), eps)

    def test_monotone_in_eps(self, rng):
        p, e = S(random_density(rng, 3)), S(random_density(rng, 3), random_density(rng, 3))
        vals = [d_min(p, e, eps).value for eps in np.linspace(0, 0.6, 7)]
        assert all(b >= a - 1e-7 for a, b in zip(vals, vals[1:]))


class TestDminConstrained:
    def test_trivial_value(self):
        e = S(PI2, PI3)
        assert d_min_constrained(S(K1), e, e, 0.1).value == pytest.approx(-math.log2(0.9), abs=1e-7)

    def test_singleton_k_equals_dmin(self, rng):
        p, e = S(random_density(rng, 2)), S(random_density(rng, 2), random_density(rng, 2))
        k = S(random_density(rng, 2))
        assert d_min_constrained(p, e, k, 0.2).value == pytest.approx(d_min(p, e, 0.2).value, abs=1e-7)

    def test_singleton_equality(self):
        e = S(PI2)
        assert d_min_constrained(S(K1), e, e, 0.1).value == pytest.approx(d_min(S(K1), e, 0.1).value, abs=1e-7)

    def test_affine_hull_flag(self):
        e = S(PI2, PI3, hull="affine")
        assert d_min(S(K1), e, 0.1).value == pytest.approx(-math.log2(0.9), abs=1e-7)

    def test_monotone_in_eps(self, rng):
        p = S(random_density(rng, 3))
        e = S(random_density(rng, 3), random_density(rng, 3))
        vals = [d_min_constrained(p, e, e, eps).value for eps in np.linspace(0, 0.6, 7)]
        assert all(b >= a - 1e-7 for a, b in zip(vals, vals[1:]))


class TestDmax:
    def test_pair_battery(self):
        assert d_max_pair(K1, PI2, 0.1).value == pytest.approx(1 + math.log2(0.9), abs=1e-7)

    def test_pair_identical(self, rng):
        rho = random_density(rng, 3)
        assert d_max_pair(rho, rho, 0.0).value == pytest.approx(0.0, abs=1e-7)

    def test_pair_commuting(self):
        assert d_max_pair(np.diag([0.9, 0.1]), PI2, 0.0).value == pytest.approx(math.log2(1.8), abs=1e-8)

    def test_pair_support_violation(self):
        r = d_max_pair(PI2, projector(0, 2).matrix, 0.1)
        assert r.value == math.inf

    def test_set_argmin(self):
        r = d_max(S(K1), S(PI2, PI3), 0.1)
        assert r.value == pytest.approx(1 + math.log2(0.9), abs=1e-7)

    def test_singletons(self, rng):
        rho, tau = random_density(rng, 2), random_density(rng, 2)
        assert d_max(S(rho), S(tau), 0.1).value == pytest.approx(d_max_pair(rho, tau, 0.1).value, abs=1e-7)

    def test_two_copies(self):
        r = d_max(S(tensor_power(K1, 2)), S(tensor_power(PI2, 2)), 0.1)
        assert r.value == pytest.approx(2 + math.log2(0.9), abs=1e-6)

    def test_monotone_in_eps(self, rng):
        p, e = S(random_density(rng, 2)), S(random_density(rng, 2))
        vals = [d_max(p, e, eps).value for eps in np.linspace(0, 0.6, 7)]
        assert all(b <= a + 1e-7 for a, b in zip(vals, vals[1:]))


class TestDmaxSegment:
    def test_worked_instance(self):
        e = S(PI2, np.diag([0.35, 0.65]), hull="convex")
        r = d_max_segment(S(K1), e, 0.1)
        assert r.value == pytest.approx(segment_geometry_1d(0.5, 0.65, 0.9), abs=1e-6)
        assert r.value == pytest.approx(math.log2(8 / 3), abs=1e-6)

    def test_singleton_far(self):
        r = d_max_segment(S(K1), S(PI2), 0.1)
        assert r.status == "infeasible_up_to_cap" and r.value == math.inf

    def test_ball_meets_e(self):
        e = S(PI2, np.diag([0.05, 0.95]), hull="convex")
        assert d_max_segment(S(K1), e, 0.1).value == pytest.approx(0.0, abs=1e-6)

    def test_parametric_backend(self):
        e = materialize(StateSet.from_sampler(Sampler("battery_interval", {"M_lo": 2.0, "M_hi": 2.5}, 9)))
        r = d_max_segment(S(K1), e, 0.1)
        p_lo = 1 / 2.5
        assert r.value == pytest.approx(math.log2((0.9 - p_lo) / (0.5 - p_lo)), abs=1e-6)

    def test_parametric_two_copies_capped(self):
        base = {"family": "battery_interval", "params": {"M_lo": 2.0, "M_hi": 2.5}}
        e = materialize(StateSet.from_sampler(Sampler("iid_power", {"base": base, "n": 2}, 9)))
        r = d_max_segment(S(tensor_power(K1, 2)), e, 0.1, m_cap=1e4)
        assert r.status == "infeasible_up_to_cap" and r.m_cap == 1e4

    def test_affine_unavailable(self):
        with pytest.raises(BackendUnavailable):
            d_max_segment(S(K1), S(PI2, PI3, hull="affine"), 0.1)

    def test_not_below_dmax(self, rng):
        for _ in range(5):
            p = S(random_density(rng, 2))
            e = S(random_density(rng, 2), random_density(rng, 2), hull="convex")
            seg = d_max_segment(p, e, 0.2)
            assert d_max(p, e, 0.2).value <= seg.value + 1e-6


class TestSpectral:
    def test_umegaki(self, rng):
        rho = random_density(rng, 3)
        assert umegaki(rho, rho) == pytest.approx(0.0, abs=1e-10)
        assert umegaki(K1, PI2) == pytest.approx(1.0, abs=1e-12)
        assert umegaki(PI2, K1) == math.inf

    def test_quasi(self, rng):
        rho, tau = random_density(rng, 2), random_density(rng, 2)
        assert trace_quasi(rho, rho, 0.3) == pytest.approx(1.0, abs=1e-12)
        assert trace_quasi(K1, PI2, 0.5) == pytest.approx(math.sqrt(0.5), abs=1e-12)
        two = trace_quasi(tensor_power(rho, 2), tensor_power(tau, 2), 0.4)
        assert two == pytest.approx(trace_quasi(rho, tau, 0.4) ** 2, abs=1e-12)

    def test_hoeffding_pure_infinite(self):
        assert hoeffding(K1, PI2, 1, 0.5) == math.inf
        assert zero_error_threshold(K1, PI2) == pytest.approx(1.0)

    def test_hoeffding_oracle(self):
        p, q = np.array([0.9, 0.1]), np.array([0.5, 0.5])
        assert hoeffding(np.diag(p), PI2, 1, 0.2) == pytest.approx(hoeffding_diagonal_grid(p, q, 0.2), abs=1e-6)

    def test_hoeffding_normalized_constant(self, rng):
        rho, tau = random_density(rng, 2), random_density(rng, 2)
        vals = [hoeffding(rho, tau, n, 0.05) / n for n in (1, 2, 4)]
        assert max(vals) - min(vals) <= 1e-9

    def test_hoeffding_bad_rate(self):
        with pytest.raises(BadParameter):
            hoeffding(K1, PI2, 1, 0.0)


class TestCommutingOracles:
    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_dmin_lp(self, rng, d):
        for _ in range(3):
            ps = [rng.dirichlet(np.ones(d)) for _ in range(2)]
            qs = [rng.dirichlet(np.ones(d)) for _ in range(2)]
            val = d_min(S(*[np.diag(p) for p in ps]), S(*[np.diag(q) for q in qs]), 0.2).value
            assert val == pytest.approx(dmin_diagonal_lp(ps, qs, 0.2), abs=1e-7)

    def test_dmax_eps0(self, rng):
        for _ in range(5):
            p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
            assert d_max_pair(np.diag(p), np.diag(q), 0.0).value == pytest.approx(dmax_diagonal_eps0(p, q), abs=1e-8)

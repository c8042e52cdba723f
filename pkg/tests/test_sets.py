import numpy as np
import pytest

from conftest import random_density
from uncertain_thermo.errors import BadParameter, DimMismatch, GridTooCoarse, SchemaError
from uncertain_thermo.gibbs import battery_gibbs, qubit_field_bloch
from uncertain_thermo.operators import projector
from uncertain_thermo.sets import (
    Curve,
    Sampler,
    StateSet,
    conv_aff_intersection,
    difference_subspace_basis,
    materialize,
    set_geometry,
)


def bloch(rho):
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])


def field_ball(grid=6, h0=1.0, delta=0.1, beta=1.0):
    return materialize(StateSet.from_sampler(Sampler("qubit_field_ball", {"h0": h0, "delta": delta, "beta": beta}, grid)))


class TestMaterialize:
    def test_battery_interval(self):
        s = materialize(StateSet.from_sampler(Sampler("battery_interval", {"M_lo": 2, "M_hi": 2.5}, 3)))
        for g, m in zip(s.matrices, [2, 2.25, 2.5]):
            np.testing.assert_allclose(g, battery_gibbs(m).matrix, atol=1e-15)

    def test_qubit_field_ball(self):
        s = field_ball()
        assert len(s) == 7
        for g in s.matrices:
            r = bloch(g)
            assert np.linalg.norm(r) > 0
        np.testing.assert_allclose(bloch(s.matrices[-1]), qubit_field_bloch([0, 0, 1.0], 1.0), atol=1e-12)

    def test_iid_power(self):
        base = {"family": "battery_interval", "params": {"M_lo": 2.0, "M_hi": 2.5}}
        s = materialize(StateSet.from_sampler(Sampler("iid_power", {"base": base, "n": 2}, 5)))
        assert len(s) == 5 and s.dim == 4
        np.testing.assert_allclose(s.matrices[0], np.eye(4) / 4, atol=1e-15)

    def test_battery_ray_limit(self):
        s = materialize(StateSet.from_sampler(Sampler("battery_ray", {"M_lo": 2.0}, 4)))
        assert len(s) == 5
        np.testing.assert_allclose(s.matrices[-1], projector(0, 2).matrix)
        off = materialize(StateSet.from_sampler(Sampler("battery_ray", {"M_lo": 2.0, "include_limit": False}, 4)))
        assert len(off) == 4

    def test_idempotent_and_deterministic(self):
        s = StateSet.from_sampler(Sampler("battery_interval", {"M_lo": 2, "M_hi": 3}, 4))
        a, b = materialize(s), materialize(materialize(s))
        assert len(a) == len(b) == 4

    @pytest.mark.parametrize("grid", [0, 1])
    def test_grid_too_coarse(self, grid):
        with pytest.raises(GridTooCoarse):
            Sampler("battery_interval", {"M_lo": 2, "M_hi": 3}, grid)

    @pytest.mark.parametrize(
        "family, params",
        [("nope", {}), ("battery_interval", {"M_lo": 3, "M_hi": 2}), ("battery_ray", {}), ("iid_power", {"n": 0})],
    )
    def test_bad_sampler(self, family, params):
        with pytest.raises(BadParameter):
            Sampler(family, params, 3)

    def test_curve_matches_grid(self):
        s = Sampler("battery_interval", {"M_lo": 2, "M_hi": 3}, 3)
        np.testing.assert_allclose(s.curve(0.5), battery_gibbs(2.5).matrix)
        dist, t = Curve(s).nearest(battery_gibbs(2.7).matrix)
        assert dist == pytest.approx(0.0, abs=1e-8) and t == pytest.approx(0.7, abs=1e-6)


class TestSubspace:
    def test_battery_pair(self):
        b = difference_subspace_basis(StateSet.from_states([battery_gibbs(2), battery_gibbs(3)]))
        assert b.dimension == 1
        op = b.operators[0]
        op = op * np.sign(op[1, 1].real)
        np.testing.assert_allclose(op, np.diag([-1, 1]) / np.sqrt(2), atol=1e-12)

    def test_singleton(self):
        assert difference_subspace_basis(StateSet.from_states([battery_gibbs(2)])).dimension == 0

    def test_field_ball_full_rank(self):
        b = difference_subspace_basis(field_ball())
        assert b.dimension == 3
        c = b.projector_coords()
        np.testing.assert_allclose(c @ c.T, np.eye(3), atol=1e-9)

    def test_permutation_invariant(self, rng):
        gens = [random_density(rng, 3) for _ in range(4)]
        b1 = difference_subspace_basis(StateSet.from_states(gens)).projector_coords()
        b2 = difference_subspace_basis(StateSet.from_states(gens[::-1])).projector_coords()
        np.testing.assert_allclose(b1.T @ b1, b2.T @ b2, atol=1e-8)

    def test_refinement_never_lowers_rank(self):
        ranks = [difference_subspace_basis(field_ball(grid=g)).dimension for g in (2, 3, 6)]
        assert ranks == sorted(ranks)


class TestIntersection:
    def test_affine_witness(self):
        res = conv_aff_intersection(StateSet.from_states([projector(1, 2)]),
                                    StateSet.from_states([battery_gibbs(2), battery_gibbs(3)]))
        assert res.feasible
        np.testing.assert_allclose(res.a, [4.0, -3.0], atol=1e-8)
        assert res.witness_error <= 1e-7

    def test_disjoint(self):
        res = conv_aff_intersection(StateSet.from_states([projector(1, 2)]), StateSet.from_states([battery_gibbs(2)]))
        assert not res.feasible

    def test_field_ball_automatic(self, rng):
        for _ in range(3):
            assert conv_aff_intersection(StateSet.from_states([random_density(rng, 2)]), field_ball()).feasible

    def test_conv_implies_aff(self, rng):
        for _ in range(10):
            p = StateSet.from_states([random_density(rng, 2, real=True) for _ in range(2)])
            e = StateSet.from_states([random_density(rng, 2, real=True) for _ in range(2)])
            if conv_aff_intersection(p, e, "conv").feasible:
                assert conv_aff_intersection(p, e, "aff").feasible

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            conv_aff_intersection(StateSet.from_states([np.eye(2) / 2]), StateSet.from_states([np.eye(3) / 3]))


class TestGeometry:
    def test_singleton(self):
        g = set_geometry(StateSet.from_states([projector(1, 2)]), StateSet.from_states([battery_gibbs(2)]))
        assert g.separation == pytest.approx(0.5, abs=1e-12) and g.diameter == 0.0

    def test_diameter(self):
        g = set_geometry(StateSet.from_states([projector(1, 2)]), StateSet.from_states([battery_gibbs(2), battery_gibbs(4)]))
        assert g.diameter == pytest.approx(0.25, abs=1e-12)

    def test_same_sets(self, rng):
        s = StateSet.from_states([random_density(rng, 3) for _ in range(2)], hull="convex")
        assert set_geometry(s, s).separation == pytest.approx(0.0, abs=1e-7)

    def test_hull_separation_below_generators(self, rng):
        p = StateSet.from_states([projector(1, 2)])
        e = StateSet.from_states([battery_gibbs(2), np.diag([0.35, 0.65])], hull="convex")
        g = set_geometry(p, e)
        assert g.convention == "hull"
        assert g.separation == pytest.approx(0.35, abs=1e-7)

    def test_refining_never_increases_separation(self):
        p = StateSet.from_states([projector(1, 2)])
        seps = []
        for grid in (2, 3, 5, 9):
            e = StateSet.from_sampler(Sampler("battery_interval", {"M_lo": 2, "M_hi": 4}, grid))
            seps.append(set_geometry(p, materialize(e)).separation)
        assert all(b <= a + 1e-12 for a, b in zip(seps, seps[1:]))


class TestSerialization:
    def test_round_trip(self):
        s = StateSet.from_sampler(Sampler("battery_interval", {"M_lo": 2, "M_hi": 3}, 4), extra=[projector(1, 2)])
        back = StateSet.from_dict(materialize(s).to_dict())
        assert len(materialize(back)) == len(materialize(s))
        assert back.sampler == s.sampler

    def test_unknown_field(self):
        with pytest.raises(SchemaError):
            StateSet.from_dict({"generators": [], "hul": "finite"})

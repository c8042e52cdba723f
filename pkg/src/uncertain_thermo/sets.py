"""Uncertainty sets of states and their convex geometry.

A :class:`StateSet` is a finite list of generators, a flag saying whether
the set stands for those generators, their convex hull or their affine hull,
and optionally a named parametric family that is discretized on a grid by
:func:`materialize`.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BadParameter, DimMismatch, GridTooCoarse, SchemaError
from .gibbs import battery_gibbs, qubit_field_gibbs
from .operators import (
    ArrayLike,
    DensityOperator,
    format_matrix,
    from_hs_coordinates,
    hs_coordinates,
    make_density,
    parse_matrix,
    tensor_power,
    trace_distance,
)
from .solver import SdpProblem, SolveCertificate, Status, solve_lp

RANK_CUTOFF = 1e-9
WITNESS_TOL = 1e-7
DEFAULT_M_CAP = 1e6


class Hull(str, enum.Enum):
    FINITE = "finite"
    CONVEX = "convex"
    AFFINE = "affine"


# -- parametric families -------------------------------------------------------

FAMILIES = ("battery_interval", "battery_ray", "qubit_field_ball", "iid_power")


@dataclass(frozen=True)
class Sampler:
    """Named parametric family plus grid size.

    Families and their ``params``:

    * ``battery_interval``: ``M_lo``, ``M_hi``; ``{π_M : M ∈ [M_lo, M_hi]}`` on a uniform M grid.
    * ``battery_ray``: ``M_lo``, optional ``M_cap`` (default 1e6) and
      ``include_limit`` (default true); ``{π_M : M ≥ M_lo}`` on a geometric
      grid up to ``M_cap`` plus the limit ``|0⟩⟨0|``.
    * ``qubit_field_ball``: ``h0``, ``delta``, ``beta``; Gibbs states of
      ``−h·σ`` for ``h`` on a Fibonacci sphere of radius ``delta`` around
      ``h0·ẑ``, plus the center.
    * ``iid_power``: ``base`` (a nested ``{"family", "params"}``) and ``n``;
      n-fold tensor powers of the base family.
    """

    family: str
    params: dict = field(hash=False)
    grid: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadParameter(f"unknown sampler family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.grid, (int, np.integer)) or self.grid < 2:
            raise GridTooCoarse(f"grid size must be an integer >= 2, got {self.grid!r}")
        self._validate()

    def _validate(self) -> None:
        p = self.params
        try:
            if self.family == "battery_interval":
                if not 1 < float(p["M_lo"]) <= float(p["M_hi"]):
                    raise BadParameter("battery_interval needs 1 < M_lo <= M_hi")
            elif self.family == "battery_ray":
                if not 1 < float(p["M_lo"]) < float(p.get("M_cap", DEFAULT_M_CAP)):
                    raise BadParameter("battery_ray needs 1 < M_lo < M_cap")
            elif self.family == "qubit_field_ball":
                float(p["h0"])
                if float(p["delta"]) < 0 or float(p["beta"]) <= 0:
                    raise BadParameter("qubit_field_ball needs delta >= 0 and beta > 0")
            else:
                if int(p["n"]) < 1:
                    raise BadParameter("iid_power needs n >= 1")
                self.base
        except KeyError as exc:
            raise BadParameter(f"{self.family} is missing parameter {exc.args[0]!r}") from None

    @property
    def base(self) -> "Sampler":
        b = self.params["base"]
        if isinstance(b, Sampler):
            return Sampler(b.family, b.params, self.grid)
        return Sampler(b["family"], dict(b["params"]), self.grid)

    @property
    def one_parameter(self) -> bool:
        """True when the family is a curve ``t ↦ state(t)``, ``t ∈ [0, 1]``."""
        if self.family == "iid_power":
            return self.base.one_parameter
        return self.family in ("battery_interval", "battery_ray")

    def curve(self, t: float) -> np.ndarray:
        """State at curve parameter ``t ∈ [0, 1]`` (one-parameter families only).

        ``battery_interval`` is linear in ``M``; ``battery_ray`` is linear in
        the excited population ``1/M`` from ``1/M_lo`` down to 0 (or
        ``1/M_cap`` when the limit point is excluded).
        """
        p = self.params
        if self.family == "battery_interval":
            m = float(p["M_lo"]) + t * (float(p["M_hi"]) - float(p["M_lo"]))
            return np.diag([1 - 1 / m, 1 / m]).astype(complex)
        if self.family == "battery_ray":
            lo = 0.0 if p.get("include_limit", True) else 1.0 / float(p.get("M_cap", DEFAULT_M_CAP))
            q = 1.0 / float(p["M_lo"]) + t * (lo - 1.0 / float(p["M_lo"]))
            return np.diag([1 - q, q]).astype(complex)
        if self.family == "iid_power":
            return np.asarray(tensor_power(DensityOperator._trusted(self.base.curve(t)), int(p["n"])).matrix)
        raise BadParameter(f"{self.family} is not a one-parameter family")

    def points(self) -> list[DensityOperator]:
        p = self.params
        g = self.grid
        if self.family == "battery_interval":
            ms = np.linspace(float(p["M_lo"]), float(p["M_hi"]), g)
            return [battery_gibbs(float(m)) for m in ms]
        if self.family == "battery_ray":
            cap = float(p.get("M_cap", DEFAULT_M_CAP))
            ms = np.geomspace(float(p["M_lo"]), cap, g)
            out = [battery_gibbs(float(m)) for m in ms]
            if p.get("include_limit", True):
                out.append(battery_gibbs(math.inf))
            return out
        if self.family == "qubit_field_ball":
            h0, delta, beta = float(p["h0"]), float(p["delta"]), float(p["beta"])
            center = np.array([0.0, 0.0, h0])
            fields = [center + delta * u for u in fibonacci_sphere(g)] + [center]
            return [qubit_field_gibbs(h, beta) for h in fields]
        n = int(p["n"])
        return [tensor_power(s, n) for s in self.base.points()]

    def resolution(self) -> float:
        """Largest trace distance from a grid point to its nearest grid neighbour."""
        pts = [s.matrix for s in self.points()]
        if len(pts) < 2:
            return 0.0
        worst = 0.0
        for i, a in enumerate(pts):
            worst = max(worst, min(trace_distance(a, b) for j, b in enumerate(pts) if j != i))
        return worst

    def metadata(self) -> dict:
        return {"family": self.family, "params": _jsonable(self.params), "grid": int(self.grid)}

    def to_dict(self) -> dict:
        return self.metadata()


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = math.pi * (1 + math.sqrt(5)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, Sampler):
            out[k] = {"family": v.family, "params": _jsonable(v.params)}
        elif isinstance(v, dict):
            out[k] = _jsonable(v)
        elif isinstance(v, (np.floating, np.integer)):
            out[k] = v.item()
        else:
            out[k] = v
    return out


# -- state sets ----------------------------------------------------------------


@dataclass(frozen=True)
class StateSet:
    """Uncertainty set: generators, hull flag and optional sampler.

    Example:
        >>> e = StateSet.from_states([battery_gibbs(2), battery_gibbs(3)], hull="convex")
        >>> e.dim
        2
    """

    generators: tuple = ()
    hull: Hull = Hull.FINITE
    sampler: Sampler | None = None
    materialized: bool = True

    def __post_init__(self):
        gens = tuple(make_density(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "hull", Hull(self.hull))
        if not gens and self.sampler is None:
            raise BadParameter("a state set needs at least one generator or a sampler")
        dims = {g.dim for g in gens}
        if len(dims) > 1:
            raise DimMismatch(f"generators have different dimensions {sorted(dims)}")

    @classmethod
    def from_states(cls, states: Sequence[ArrayLike], hull: Hull | str = Hull.FINITE) -> "StateSet":
        return cls(tuple(states), Hull(hull))

    @classmethod
    def from_sampler(cls, sampler: Sampler, hull: Hull | str = Hull.FINITE, extra: Sequence[ArrayLike] = ()) -> "StateSet":
        return cls(tuple(extra), Hull(hull), sampler, materialized=False)

    @property
    def dim(self) -> int:
        if self.generators:
            return self.generators[0].dim
        return self.sampler.points()[0].dim

    @property
    def matrices(self) -> list[np.ndarray]:
        return [g.matrix for g in self.generators]

    def __len__(self) -> int:
        return len(self.generators)

    def grid_metadata(self) -> dict | None:
        if self.sampler is None:
            return None
        meta = self.sampler.metadata()
        meta["resolution"] = self.sampler.resolution()
        return meta

    def with_hull(self, hull: Hull | str) -> "StateSet":
        return StateSet(self.generators, Hull(hull), self.sampler, self.materialized)

    def to_dict(self) -> dict:
        own = self.generators
        if self.sampler is not None and self.materialized:
            own = own[: len(own) - len(self.sampler.points())]
        out: dict[str, Any] = {"generators": [format_matrix(g) for g in own], "hull": self.hull.value}
        if self.sampler is not None:
            out["sampler"] = self.sampler.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StateSet":
        """Parse ``{"generators": [...], "hull": ..., "sampler": {...}}``."""
        if not isinstance(data, dict):
            raise SchemaError("a state set must be a JSON object")
        unknown = set(data) - {"generators", "hull", "sampler"}
        if unknown:
            raise SchemaError(f"unknown state-set fields {sorted(unknown)}")
        try:
            gens = [parse_matrix(m) for m in data.get("generators", [])]
            hull = Hull(data.get("hull", "finite"))
            sampler = None
            if data.get("sampler") is not None:
                s = data["sampler"]
                if set(s) - {"family", "params", "grid"}:
                    raise SchemaError(f"unknown sampler fields {sorted(set(s) - {'family', 'params', 'grid'})}")
                sampler = Sampler(s["family"], dict(s.get("params", {})), int(s.get("grid", 9)))
            return cls(tuple(gens), hull, sampler, materialized=sampler is None)
        except SchemaError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaError(f"invalid state set: {exc}") from exc


def materialize(s: StateSet) -> StateSet:
    """Append the sampler's grid points to the generators (idempotent)."""
    if s.materialized:
        return s
    return StateSet(s.generators + tuple(s.sampler.points()), s.hull, s.sampler, materialized=True)


def _ready(*sets: StateSet) -> list[StateSet]:
    out = [materialize(s) for s in sets]
    dims = {s.dim for s in out}
    if len(dims) > 1:
        raise DimMismatch(f"state sets have different dimensions {sorted(dims)}")
    return out


# -- difference subspace -------------------------------------------------------


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal Hermitian basis of ``V(K) = span{τ − τ′ : τ, τ′ ∈ K}``."""

    operators: tuple
    dim_space: int

    @property
    def dimension(self) -> int:
        return len(self.operators)

    def projector_coords(self) -> np.ndarray:
        """Rows are Hilbert-Schmidt coordinates of the basis elements."""
        if not self.operators:
            return np.zeros((0, self.dim_space**2))
        return np.array([hs_coordinates(b) for b in self.operators])


def difference_subspace_basis(k: StateSet) -> SubspaceBasis:
    """Orthonormal basis of the span of ``g_i − g_0`` (SVD, relative cutoff 1e-9)."""
    (k,) = _ready(k)
    d = k.dim
    g0 = k.generators[0].matrix
    diffs = np.array([hs_coordinates(g.matrix - g0) for g in k.generators[1:]]).reshape(-1, d * d)
    if diffs.shape[0] == 0:
        return SubspaceBasis((), d)
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    if s[0] <= 0:
        return SubspaceBasis((), d)
    rank = int(np.sum(s > RANK_CUTOFF * s[0]))
    ops = tuple(from_hs_coordinates(v, d) for v in vt[:rank])
    return SubspaceBasis(ops, d)


# -- hull intersections --------------------------------------------------------


@dataclass(frozen=True)
class IntersectionResult:
    feasible: bool
    mode: str
    c: np.ndarray | None
    a: np.ndarray | None
    certificate: SolveCertificate
    witness_error: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "mode": self.mode,
            "c": None if self.c is None else [float(x) for x in self.c],
            "a": None if self.a is None else [float(x) for x in self.a],
            "witness_error": None if math.isnan(self.witness_error) else self.witness_error,
            "certificate": self.certificate.to_dict(),
        }


def conv_aff_intersection(p: StateSet, e: StateSet, mode: str = "conv") -> IntersectionResult:
    """Decide ``conv(P) ∩ aff(E) ≠ ∅`` (``mode="conv"``) or ``aff(P) ∩ aff(E) ≠ ∅`` (``mode="aff"``).

    Solved as an LP in Hilbert-Schmidt coordinates: ``Σ c_i ρ_i = Σ a_j τ_j``
    with ``Σ c = Σ a = 1`` and ``c ≥ 0`` in conv mode.  The witness is
    checked by reconstruction.
    """
    if mode not in ("conv", "aff"):
        raise BadParameter(f"mode must be 'conv' or 'aff', got {mode!r}")
    p, e = _ready(p, e)
    xp = np.array([hs_coordinates(g.matrix) for g in p.generators]).T
    xe = np.array([hs_coordinates(g.matrix) for g in e.generators]).T
    n_p, n_e = xp.shape[1], xe.shape[1]
    a_eq = np.vstack([
        np.hstack([xp, -xe]),
        np.concatenate([np.ones(n_p), np.zeros(n_e)]),
        np.concatenate([np.zeros(n_p), np.ones(n_e)]),
    ])
    b_eq = np.concatenate([np.zeros(xp.shape[0]), [1.0, 1.0]])
    lo = 0.0 if mode == "conv" else None
    bounds = [(lo, None)] * n_p + [(None, None)] * n_e
    x, cert = solve_lp(np.zeros(n_p + n_e), A_eq=a_eq, b_eq=b_eq, bounds=bounds)
    if x is None:
        return IntersectionResult(False, mode, None, None, cert)
    c, a = x[:n_p], x[n_p:]
    lhs = sum(ci * g.matrix for ci, g in zip(c, p.generators))
    rhs = sum(aj * g.matrix for aj, g in zip(a, e.generators))
    err = float(np.max(np.abs(lhs - rhs)))
    return IntersectionResult(err <= WITNESS_TOL, mode, c, a, cert, err)


# -- separation and diameter ---------------------------------------------------


@dataclass(frozen=True)
class Geometry:
    separation: float
    diameter: float
    convention: str
    certificates: tuple = ()

    def to_dict(self) -> dict:
        return {
            "separation": self.separation,
            "diameter": self.diameter,
            "convention": self.convention,
            "certificates": [c.to_dict() for c in self.certificates],
        }


def _choices(s: StateSet) -> list[list[np.ndarray]]:
    if s.hull is Hull.FINITE:
        return [[m] for m in s.matrices]
    return [s.matrices]


def hull_trace_distance(ps: Sequence[np.ndarray], es: Sequence[np.ndarray]) -> tuple[float, SolveCertificate | None]:
    """``min T(Σ c_i ρ_i, Σ a_j τ_j)`` over probability vectors ``c, a``.

    The trace norm is written as ``tr Y₊ + tr Y₋`` with ``Y₊ − Y₋`` equal to
    the difference and ``Y± ⪰ 0``.
    """
    if len(ps) == 1 and len(es) == 1:
        return trace_distance(ps[0], es[0]), None
    d = ps[0].shape[0]
    prob = SdpProblem("hull_trace_distance")
    c = prob.scalars("c", len(ps), lb=0.0)
    a = prob.scalars("a", len(es), lb=0.0)
    yp = prob.matrix("Y+", d, psd=True)
    ym = prob.matrix("Y-", d, psd=True)
    prob.add_linear({v: 1.0 for v in c}, "==", 1.0)
    prob.add_linear({v: 1.0 for v in a}, "==", 1.0)
    terms: dict = {yp: 1.0, ym: -1.0}
    terms.update({v: -m for v, m in zip(c, ps)})
    terms.update({v: m for v, m in zip(a, es)})
    prob.add_matrix_eq(terms)
    prob.minimize({yp: 0.5 * np.eye(d), ym: 0.5 * np.eye(d)})
    sol, cert = prob.solve()
    if cert.status is not Status.OPTIMAL:
        raise BadParameter(f"hull distance program ended with status {cert.status.value}")
    return max(0.0, cert.primal_value), cert


def separation(p: StateSet, e: StateSet) -> tuple[float, list[SolveCertificate]]:
    p, e = _ready(p, e)
    best, certs = math.inf, []
    for ps, es in itertools.product(_choices(p), _choices(e)):
        val, cert = hull_trace_distance(ps, es)
        if cert is not None:
            certs.append(cert)
        best = min(best, val)
    return best, certs


def diameter(e: StateSet) -> float:
    """Largest pairwise trace distance of generators (0 for a singleton).

    The same value holds for the convex hull since trace distance is convex
    in each argument.
    """
    (e,) = _ready(e)
    mats = e.matrices
    return max((trace_distance(a, b) for a, b in itertools.combinations(mats, 2)), default=0.0)


def set_geometry(p: StateSet, e: StateSet) -> Geometry:
    """Separation ``T(P, E)`` and diameter ``diam(E)``.

    Sets flagged ``convex`` are measured over their hulls; the convention
    used is recorded in the result.
    """
    p, e = _ready(p, e)
    sep, certs = separation(p, e)
    conv = "hull" if Hull.CONVEX in (p.hull, e.hull) or Hull.AFFINE in (p.hull, e.hull) else "generators"
    return Geometry(sep, diameter(e), conv, tuple(certs))


# -- distance to a one-parameter curve -----------------------------------------


class Curve:
    """Dense tabulation of a one-parameter family for distance queries.

    A vectorized scan over ``dense`` parameter values is refined by bounded
    Brent search around the best point whenever that point is close.
    """

    def __init__(self, sampler: Sampler, dense: int = 257):
        if not sampler.one_parameter:
            raise BadParameter(f"{sampler.family} is not a one-parameter family")
        self.sampler = sampler
        self.ts = np.linspace(0.0, 1.0, dense)
        self.pts = np.array([sampler.curve(t) for t in self.ts])

    def nearest(self, x: np.ndarray, refine_below: float = 1e-3) -> tuple[float, float]:
        """Trace distance from ``x`` to the curve and the minimizing parameter."""
        ev = np.linalg.eigvalsh(self.pts - np.asarray(x)[None])
        vals = 0.5 * np.abs(ev).sum(axis=1)
        i = int(np.argmin(vals))
        best, best_t = float(vals[i]), float(self.ts[i])
        if best > refine_below:
            return best, best_t
        lo, hi = self.ts[max(i - 1, 0)], self.ts[min(i + 1, len(self.ts) - 1)]
        res = minimize_scalar(lambda t: trace_distance(self.sampler.curve(float(t)), x),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        if res.fun < best:
            best, best_t = float(res.fun), float(res.x)
        return best, best_t

    def distance(self, x: np.ndarray) -> float:
        return self.nearest(x)[0]


def curve_distance(sampler: Sampler, x: np.ndarray) -> tuple[float, float]:
    """Trace distance from ``x`` to the sampler's curve and the minimizing ``t``."""
    return Curve(sampler).nearest(x, refine_below=math.inf)

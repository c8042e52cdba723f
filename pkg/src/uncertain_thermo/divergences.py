"""Entropic quantities between uncertainty sets.

All values are in bits.  Hypothesis-testing and max-relative-entropy
quantities are semidefinite programs; Umegaki, quasi-entropy and Hoeffding
quantities use spectral calculus.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BackendUnavailable, BadParameter, DimMismatch
from .operators import (
    ArrayLike,
    HermitianOperator,
    as_matrix,
    format_matrix,
    herm_function,
    spectrum,
    support_projector,
    trace_distance,
)
from .sets import (
    Curve,
    Hull,
    StateSet,
    SubspaceBasis,
    difference_subspace_basis,
    hull_trace_distance,
    materialize,
)
from .solver import SdpProblem

T_ZERO = 1e-12
TEST_TOL = 1e-8
SUPPORT_TOL = 1e-10
DEFAULT_M_CAP = 1e4
CHORD_TOL = 1e-9
CHORD_GRID = 64
HOEFFDING_GRID = 256
HOEFFDING_LO, HOEFFDING_HI = 1e-3, 0.999
HOEFFDING_INF = 1e6


class TestOperator:
    """Measurement effect ``0 ⪯ E ⪯ I`` (eigenvalues within ``1e-8`` of ``[0, 1]``)."""

    __test__ = False
    __slots__ = ("op",)

    def __init__(self, matrix: ArrayLike):
        op = matrix if isinstance(matrix, HermitianOperator) else HermitianOperator(matrix)
        ev = np.linalg.eigvalsh(op.matrix)
        if ev[0] < -TEST_TOL or ev[-1] > 1 + TEST_TOL:
            raise BadParameter(f"test eigenvalues [{ev[0]:.3g}, {ev[-1]:.3g}] leave [0, 1]")
        self.op = op

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    def __array__(self, dtype=None, copy=None):
        return self.op.__array__(dtype)


@dataclass(frozen=True)
class DivergenceResult:
    """Value in bits (possibly ``inf``) with witness, certificates and grid metadata.

    ``status`` is ``"finite"``, ``"infinite"`` or ``"infeasible_up_to_cap"``;
    the last one means no feasible point was found with ``M ≤ m_cap`` and is
    not a claim that the quantity diverges.
    """

    quantity: str
    value: float
    status: str
    witness: dict | None = None
    certificates: tuple = ()
    grid: dict | None = None
    m_cap: float | None = None
    backend: str | None = None
    notes: tuple = ()

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def test(self) -> TestOperator | None:
        return None if self.witness is None else self.witness.get("test")

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "value_bits": self.value if self.finite else None,
            "status": self.status,
            "witness": _witness_json(self.witness),
            "certificates": [c.to_dict() for c in self.certificates],
            "grid": self.grid,
            "m_cap": self.m_cap,
            "backend": self.backend,
            "notes": list(self.notes),
        }


def _witness_json(w: dict | None) -> dict | None:
    if w is None:
        return None
    out: dict[str, Any] = {}
    for k, v in w.items():
        if isinstance(v, TestOperator):
            out[k] = format_matrix(v.matrix)
        elif isinstance(v, np.ndarray) and v.ndim == 2:
            out[k] = format_matrix(v)
        elif isinstance(v, np.ndarray):
            out[k] = [float(x) for x in v]
        elif isinstance(v, (np.floating, np.integer)):
            out[k] = v.item()
        else:
            out[k] = v
    return out


def _grid(*named: tuple[str, StateSet]) -> dict | None:
    meta = {name: s.grid_metadata() for name, s in named if s.sampler is not None}
    return meta or None


def _prepare(*sets: StateSet) -> list[StateSet]:
    out = [materialize(s) for s in sets]
    dims = {s.dim for s in out}
    if len(dims) > 1:
        raise DimMismatch(f"state sets have different dimensions {sorted(dims)}")
    return out


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise BadParameter(f"eps must lie in [0, 1), got {eps}")
    return eps


# -- hypothesis testing --------------------------------------------------------


def _hypothesis_program(p: StateSet, eps: float, constraints: Sequence[np.ndarray] = ()):
    d = p.dim
    prob = SdpProblem("hypothesis_test")
    e = prob.matrix("E", d, interval=True, regularize=True)
    for rho in p.matrices:
        prob.add_linear({e: rho}, ">=", 1.0 - eps)
    if p.hull is Hull.AFFINE:
        rho0 = p.matrices[0]
        for rho in p.matrices[1:]:
            prob.add_linear({e: rho - rho0}, "==", 0.0)
    for b in constraints:
        prob.add_linear({e: b}, "==", 0.0)
    return prob, e


def _type2_result(quantity, prob, e, tvar, p, ev, extra_grid, notes=()) -> DivergenceResult:
    sol, cert = prob.solve()
    grid = _grid(("P", p), ("E", ev), *extra_grid)
    if sol is None:
        # the type-I constraint alone is always satisfiable by E = I
        raise BadParameter(f"{quantity}: program unexpectedly {cert.status.value}")
    t = sol[tvar] if tvar is not None else cert.primal_value
    if tvar is None:
        t = float(np.real(np.trace(prob._objective[e] @ sol[e])))
    test = TestOperator(sol[e])
    if t <= T_ZERO:
        return DivergenceResult(quantity, math.inf, "infinite", {"test": test, "type2": t}, (cert,), grid, notes=notes)
    return DivergenceResult(quantity, -math.log2(t), "finite", {"test": test, "type2": t}, (cert,), grid, notes=notes)


def d_min(p: StateSet, e: StateSet, eps: float) -> DivergenceResult:
    """Smoothed min-relative entropy ``D_min,ε(P‖E)``.

    ``−log₂ min_E max_j tr[E τ_j]`` over tests with ``tr[(I − E)ρ_i] ≤ ε``.
    An ``affine`` flag on ``E`` evaluates against ``aff(E)``, which is the
    subspace-constrained quantity with ``K = E``.

    Example:
        >>> from uncertain_thermo.gibbs import battery_gibbs
        >>> from uncertain_thermo.operators import projector
        >>> r = d_min(StateSet.from_states([projector(1, 2)]), StateSet.from_states([battery_gibbs(2)]), 0.1)
        >>> round(r.value, 4)
        1.152
    """
    eps = _check_eps(eps)
    p, e = _prepare(p, e)
    if e.hull is Hull.AFFINE:
        res = d_min_constrained(p, e.with_hull(Hull.FINITE), e.with_hull(Hull.FINITE), eps)
        return DivergenceResult("d_min", res.value, res.status, res.witness, res.certificates, res.grid,
                                notes=("evaluated against aff(E)",))
    prob, ev = _hypothesis_program(p, eps)
    t = prob.scalar("t")
    for tau in e.matrices:
        prob.add_linear({ev: tau, t: -1.0}, "<=", 0.0)
    prob.minimize({t: 1.0})
    return _type2_result("d_min", prob, ev, t, p, e, ())


def _same_set(a: StateSet, b: StateSet) -> bool:
    if len(a) != len(b):
        return False
    return all(np.allclose(x, y, atol=1e-14) for x, y in zip(a.matrices, b.matrices))


def d_min_constrained(p: StateSet, e: StateSet, k: StateSet, eps: float) -> DivergenceResult:
    """Subspace-constrained min-relative entropy ``D_min,ε^K(P‖E)``.

    The hypothesis-testing program with the test orthogonal to
    ``V(K) = span{τ − τ′ : τ, τ′ ∈ K}``.  For ``K = E`` every ``tr[E τ_j]``
    coincides, so the objective is ``tr[E τ_0]``.
    """
    eps = _check_eps(eps)
    p, e, k = _prepare(p, e, k)
    basis: SubspaceBasis = difference_subspace_basis(k)
    prob, ev = _hypothesis_program(p, eps, basis.operators)
    notes = (f"dim V(K) = {basis.dimension}",)
    extra = (("K", k),)
    if _same_set(e, k):
        prob.minimize({ev: e.matrices[0]})
        return _type2_result("d_min_constrained", prob, ev, None, p, e, extra, notes)
    t = prob.scalar("t")
    for tau in e.matrices:
        prob.add_linear({ev: tau, t: -1.0}, "<=", 0.0)
    prob.minimize({t: 1.0})
    return _type2_result("d_min_constrained", prob, ev, t, p, e, extra, notes)


# -- max-relative entropy ------------------------------------------------------


def _smoothing(prob: SdpProblem, d: int, rhos: Sequence[np.ndarray], eps: float):
    """``ω`` with ``T(ω, Σ c_i ρ_i) ≤ ε`` via ``ω − ρ = Δ₊ − Δ₋``, ``tr(Δ₊ + Δ₋) ≤ 2ε``."""
    omega = prob.matrix("omega", d, psd=True)
    dp = prob.matrix("D+", d, psd=True)
    dm = prob.matrix("D-", d, psd=True)
    prob.add_linear({omega: np.eye(d)}, "==", 1.0)
    prob.add_linear({dp: np.eye(d), dm: np.eye(d)}, "<=", 2.0 * eps)
    terms: dict = {omega: 1.0, dp: -1.0, dm: 1.0}
    if len(rhos) == 1:
        prob.add_matrix_eq(terms, -np.asarray(rhos[0]))
        return omega, None
    c = prob.scalars("c", len(rhos), lb=0.0)
    prob.add_linear({v: 1.0 for v in c}, "==", 1.0)
    terms.update({v: -np.asarray(r) for v, r in zip(c, rhos)})
    prob.add_matrix_eq(terms)
    return omega, c


def _dmax_program(rhos, taus, eps, affine=False):
    """``min Σ u_j`` s.t. ``Σ u_j τ_j ⪰ ω``, ``ω ∈ B_ε(conv{ρ_i})``; returns (M, τ, ω, cert)."""
    d = np.asarray(taus[0]).shape[0]
    prob = SdpProblem("d_max")
    omega, _ = _smoothing(prob, d, rhos, eps)
    u = prob.scalars("u", len(taus), lb=None if affine else 0.0)
    terms: dict = {omega: -1.0}
    terms.update({v: np.asarray(t) for v, t in zip(u, taus)})
    prob.add_psd(terms)
    prob.minimize({v: 1.0 for v in u})
    sol, cert = prob.solve()
    if sol is None:
        return math.inf, None, None, cert
    m = sum(sol[v] for v in u)
    tau = sum(sol[v] * np.asarray(t) for v, t in zip(u, taus)) / m
    return m, tau, sol[omega], cert


def _dmax_value(m: float) -> float:
    return math.log2(m) if m > 1.0 else 0.0 if m > 1.0 - 1e-7 else math.log2(m)


def d_max_pair(rho: ArrayLike, tau: ArrayLike, eps: float) -> DivergenceResult:
    """Smoothed max-relative entropy ``D_max,ε(ρ‖τ) = log₂ min{M : Mτ ⪰ ω, T(ω, ρ) ≤ ε}``."""
    eps = _check_eps(eps)
    r, t = as_matrix(rho), as_matrix(tau)
    if r.shape != t.shape:
        raise DimMismatch(f"shapes {r.shape} and {t.shape} differ")
    m, _, omega, cert = _dmax_program([r], [t], eps)
    if omega is None:
        return DivergenceResult("d_max_pair", math.inf, "infinite", None, (cert,),
                                notes=("no smoothed state is supported on supp(tau)",))
    return DivergenceResult("d_max_pair", _dmax_value(m), "finite", {"M": m, "omega": omega}, (cert,))


def _choices(s: StateSet) -> list[tuple[list[int], list[np.ndarray]]]:
    if s.hull is Hull.FINITE:
        return [([i], [m]) for i, m in enumerate(s.matrices)]
    return [(list(range(len(s))), s.matrices)]


def d_max(p: StateSet, e: StateSet, eps: float) -> DivergenceResult:
    """``D_max,ε(P‖E) = inf over ρ ∈ P, τ ∈ E of D_max,ε(ρ‖τ)``.

    Finite sets are scanned pairwise.  A set flagged ``convex`` (``affine``
    for ``E``) enters as a hull in one joint program; the substitution
    ``u = M·a`` keeps it linear.
    """
    eps = _check_eps(eps)
    p, e = _prepare(p, e)
    best = (math.inf, None)
    certs = []
    e_affine = e.hull is Hull.AFFINE
    for (pi, rhos), (ej, taus) in itertools.product(_choices(p), _choices(e)):
        m, tau, omega, cert = _dmax_program(rhos, taus, eps, affine=e_affine)
        certs.append(cert)
        if omega is not None and m < best[0]:
            best = (m, {"M": m, "tau": tau, "omega": omega, "rho_index": pi if len(pi) > 1 else pi[0],
                        "tau_index": ej if len(ej) > 1 else ej[0]})
    grid = _grid(("P", p), ("E", e))
    conv = "hull" if Hull.FINITE not in (p.hull,) or e.hull is not Hull.FINITE else "pairs"
    if best[1] is None:
        return DivergenceResult("d_max", math.inf, "infinite", None, tuple(certs), grid, backend=conv)
    return DivergenceResult("d_max", _dmax_value(best[0]), "finite", best[1], tuple(certs), grid, backend=conv)


# -- segment (subspace-constrained) max-relative entropy -----------------------


def d_max_segment(p: StateSet, e: StateSet, eps: float, m_cap: float = DEFAULT_M_CAP) -> DivergenceResult:
    """``D_max,ε^E(P‖E)``: least ``M`` with ``C(γ, ω, 1/M) ⊆ E``.

    ``C(γ, ω, 1/M)`` is the initial ``1/M`` portion of the half-open segment
    from ``γ ∈ cl(E)`` toward ``ω ∈ B_ε(P)``.  Backends:

    * ``convex``: ``E`` flagged convex; the endpoint form
      ``Mτ − ω ∈ cone(E)`` is a single SDP over hull coefficients.
    * ``parametric``: ``E`` is a one-parameter sampled family; chords
      between grid points that stay on the curve are scanned and the
      smallest ``M`` along each is found by bisection.
    * ``finite``: a finite point set contains no non-degenerate segment, so
      the value is 0 if some generator lies in ``B_ε(P)`` and otherwise
      there is no feasible ``M``.

    Only ``M ≤ m_cap`` is searched; failure is reported as
    ``infeasible_up_to_cap``, never as a proof of divergence.

    Raises:
        BackendUnavailable: ``E`` is neither convex, a one-parameter
            family, nor an unsampled finite set.
    """
    eps = _check_eps(eps)
    if not m_cap > 1:
        raise BadParameter(f"m_cap must exceed 1, got {m_cap}")
    p, e = _prepare(p, e)
    grid = _grid(("P", p), ("E", e))
    if e.hull is Hull.CONVEX:
        return _segment_convex(p, e, eps, m_cap, grid)
    if e.hull is Hull.FINITE and e.sampler is None:
        return _segment_finite(p, e, eps, m_cap, grid)
    if e.hull is Hull.FINITE and e.sampler.one_parameter:
        return _segment_parametric(p, e, eps, m_cap, grid)
    raise BackendUnavailable(
        f"no segment backend for hull={e.hull.value}, sampler={getattr(e.sampler, 'family', None)}"
    )


def _infeasible(m_cap, certs, grid, backend, notes=()) -> DivergenceResult:
    return DivergenceResult("d_max_segment", math.inf, "infeasible_up_to_cap", None, tuple(certs), grid,
                            m_cap=m_cap, backend=backend, notes=notes)


def _segment_convex(p, e, eps, m_cap, grid) -> DivergenceResult:
    d = e.dim
    gens = e.matrices
    best, certs = None, []
    for _, rhos in _choices(p):
        prob = SdpProblem("d_max_segment")
        omega, _ = _smoothing(prob, d, rhos, eps)
        u = prob.scalars("u", len(gens), lb=0.0)
        v = prob.scalars("v", len(gens), lb=0.0)
        terms: dict = {omega: -1.0}
        terms.update({x: g for x, g in zip(u, gens)})
        terms.update({x: -g for x, g in zip(v, gens)})
        prob.add_matrix_eq(terms)
        prob.add_linear({x: 1.0 for x in u}, ">=", 1.0)
        prob.add_linear({x: 1.0 for x in u}, "<=", m_cap)
        prob.minimize({x: 1.0 for x in u})
        sol, cert = prob.solve()
        certs.append(cert)
        if sol is None:
            continue
        m = sum(sol[x] for x in u)
        if best is None or m < best[0]:
            tau = sum(sol[x] * g for x, g in zip(u, gens)) / m
            vs = sum(sol[x] * g for x, g in zip(v, gens))
            gamma = vs / (m - 1.0) if m - 1.0 > 1e-9 else sol[omega]
            best = (m, {"M": m, "gamma": gamma, "tau": tau, "omega": sol[omega]})
    if best is None:
        return _infeasible(m_cap, certs, grid, "convex")
    return DivergenceResult("d_max_segment", _dmax_value(best[0]), "finite", best[1], tuple(certs), grid,
                            m_cap=m_cap, backend="convex")


def _distance_to_p(p: StateSet, x: np.ndarray) -> float:
    if p.hull is Hull.FINITE or len(p) == 1:
        return min(trace_distance(r, x) for r in p.matrices)
    return hull_trace_distance(p.matrices, [x])[0]


def _segment_finite(p, e, eps, m_cap, grid) -> DivergenceResult:
    for g in e.matrices:
        if _distance_to_p(p, g) <= eps:
            return DivergenceResult("d_max_segment", 0.0, "finite", {"M": 1.0, "gamma": g, "tau": g, "omega": g},
                                    (), grid, m_cap=m_cap, backend="finite")
    return _infeasible(m_cap, (), grid, "finite", ("a finite set contains only degenerate segments",))


def _chord_on_curve(curve: Curve, a: np.ndarray, b: np.ndarray) -> bool:
    if curve.distance(0.5 * (a + b)) > CHORD_TOL:
        return False
    for lam in np.linspace(0.0, 1.0, CHORD_GRID + 1):
        if curve.distance((1 - lam) * a + lam * b) > CHORD_TOL:
            return False
    return True


def _smallest_m(p: StateSet, gamma: np.ndarray, tau1: np.ndarray, eps: float, m_cap: float) -> float | None:
    """Least ``M ∈ [1, m_cap]`` with ``ω = γ + M(τ₁ − γ)`` a state in ``B_ε(P)``."""
    step = tau1 - gamma

    def h(m: float) -> float:
        w = gamma + m * step
        return max(_distance_to_p(p, w) - eps, -float(np.linalg.eigvalsh(w)[0]))

    res = minimize_scalar(h, bounds=(1.0, m_cap), method="bounded", options={"xatol": 1e-12})
    m_best = float(res.x)
    if h(m_best) > 0:
        for m in (1.0, m_cap):
            if h(m) <= 0:
                m_best = m
                break
        else:
            return None
    if h(1.0) <= 0:
        return 1.0
    lo, hi = 1.0, m_best
    for _ in range(200):
        if hi - lo <= 1e-13 * hi:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _segment_parametric(p, e, eps, m_cap, grid) -> DivergenceResult:
    gens = e.matrices
    for g in gens:
        if _distance_to_p(p, g) <= eps:
            return DivergenceResult("d_max_segment", 0.0, "finite", {"M": 1.0, "gamma": g, "tau": g, "omega": g},
                                    (), grid, m_cap=m_cap, backend="parametric")
    curve = Curve(e.sampler)
    best = None
    chords = 0
    for i, j in itertools.combinations(range(len(gens)), 2):
        a, b = gens[i], gens[j]
        if np.max(np.abs(a - b)) < 1e-14 or not _chord_on_curve(curve, a, b):
            continue
        chords += 1
        for gamma, tau1 in ((a, b), (b, a)):
            m = _smallest_m(p, gamma, tau1, eps, m_cap)
            if m is not None and (best is None or m < best[0]):
                best = (m, {"M": m, "gamma": gamma, "tau": tau1, "omega": gamma + m * (tau1 - gamma)})
    notes = (f"{chords} grid chords lie on the curve (lambda grid {CHORD_GRID} + endpoints, tol {CHORD_TOL})",)
    if best is None:
        return _infeasible(m_cap, (), grid, "parametric", notes)
    return DivergenceResult("d_max_segment", _dmax_value(best[0]), "finite", best[1], (), grid,
                            m_cap=m_cap, backend="parametric", notes=notes)


# -- spectral quantities -------------------------------------------------------


def umegaki(rho: ArrayLike, tau: ArrayLike) -> float:
    """Umegaki relative entropy ``tr[ρ(log ρ − log τ)]`` in bits; ``inf`` if ``supp ρ ⊄ supp τ``."""
    r, t = as_matrix(rho), as_matrix(tau)
    if r.shape != t.shape:
        raise DimMismatch(f"shapes {r.shape} and {t.shape} differ")
    outside = np.eye(t.shape[0]) - support_projector(t, SUPPORT_TOL)
    if float(np.real(np.trace(outside @ r))) > SUPPORT_TOL:
        return math.inf
    lam = spectrum(r).eigenvalues
    lam = lam[lam > SUPPORT_TOL]
    neg_entropy = float(np.sum(lam * np.log2(lam)))
    sp = spectrum(t)
    keep = sp.eigenvalues > SUPPORT_TOL
    u = sp.eigenvectors[:, keep]
    log_t = (u * np.log2(sp.eigenvalues[keep])) @ u.conj().T
    return max(0.0, neg_entropy - float(np.real(np.trace(r @ log_t))))


def trace_quasi(rho: ArrayLike, tau: ArrayLike, alpha: float) -> float:
    """``Q_α = tr[ρ^α τ^{1−α}]`` with ``0^x = 0`` for ``x > 0``."""
    if not 0 < alpha < 1:
        raise BadParameter(f"alpha must lie in (0, 1), got {alpha}")
    r, t = as_matrix(rho), as_matrix(tau)
    if r.shape != t.shape:
        raise DimMismatch(f"shapes {r.shape} and {t.shape} differ")
    ra = herm_function(r, "power", alpha).matrix
    tb = herm_function(t, "power", 1.0 - alpha).matrix
    return max(0.0, float(np.real(np.trace(ra @ tb))))


def hoeffding_objective(rho: ArrayLike, tau: ArrayLike, n: int, r: float, alpha: float) -> float:
    """``(1/α)((α − 1)nr − n log₂ Q_α)`` for i.i.d. inputs."""
    q = trace_quasi(rho, tau, alpha)
    if q <= 0:
        return math.inf
    return ((alpha - 1.0) * n * r - n * math.log2(q)) / alpha


def hoeffding(rho: ArrayLike, tau: ArrayLike, n: int, r: float) -> float:
    """Hoeffding divergence ``H_{n,r}(ρ^⊗n‖τ^⊗n)``, the sup over ``α ∈ (0, 1)``.

    Grid of 256 points on ``(0.001, 0.999)`` refined by bounded Brent.  When
    the maximizer sits at the left edge the objective is probed down to
    ``α = 1e-12``; values above ``1e6`` are reported as ``inf``.  The
    objective diverges as ``α → 0`` exactly when ``r < −log₂ tr[Π_ρ τ]``.
    """
    if int(n) < 1 or not r > 0:
        raise BadParameter("hoeffding needs n >= 1 and r > 0")
    f = lambda a: hoeffding_objective(rho, tau, n, r, float(a))
    alphas = np.linspace(HOEFFDING_LO, HOEFFDING_HI, HOEFFDING_GRID)
    vals = np.array([f(a) for a in alphas])
    if not np.all(np.isfinite(vals)):
        return math.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = alphas[max(i - 1, 0)], alphas[min(i + 1, len(alphas) - 1)]
    res = minimize_scalar(lambda a: -f(a), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    best = max(best, float(-res.fun))
    if i == 0:
        for a in 10.0 ** -np.arange(4, 13):
            val = f(a)
            if val > HOEFFDING_INF:
                return math.inf
            best = max(best, val)
    return max(best, 0.0)


def zero_error_threshold(rho: ArrayLike, tau: ArrayLike) -> float:
    """``−log₂ tr[Π_ρ τ]``: below this rate the Hoeffding divergence is infinite."""
    q = float(np.real(np.trace(support_projector(rho, SUPPORT_TOL) @ as_matrix(tau))))
    return math.inf if q <= 0 else -math.log2(q)

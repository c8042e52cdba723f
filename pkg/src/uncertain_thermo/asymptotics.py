"""Finite-n rate tables: the irreversibility example, optimal error at rate r,
Hoeffding exponents and relative-entropy rates.

Nothing here extrapolates to ``n → ∞``; every row is a finite-n value with
its provenance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .divergences import DEFAULT_M_CAP, TestOperator, hoeffding, umegaki
from .errors import BadParameter, DimMismatch
from .operators import ArrayLike, format_matrix, make_density, projector, tensor_power
from .sets import Hull, Sampler, StateSet, materialize
from .solver import SdpProblem, SolveCertificate
from .tasks import Battery, extractable_work, formation_cost

TOL_CROSS = 1e-5
MAX_QUBITS = 4
MAX_TENSOR_DIM = 4096

ANALYTIC_CBAR_NOTE = (
    "analytic: for n >= 2 a segment (1-p)pi_M0^n + p*omega inside {pi_M^n} forces t(p)^n = a + b p "
    "as a polynomial identity, hence b = 0 and omega = pi_M0^n, which lies at trace distance >= 3/4 > eps "
    "from |1><1|^n; so no finite work cost exists"
)


@dataclass(frozen=True)
class Entry:
    """One table value with provenance ``closed-form``, ``solver`` or ``both``."""

    value: float
    provenance: str
    closed_form: float | None = None
    discrepancy: float | None = None
    status: str = "finite"
    certificates: tuple = ()

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "value": num(self.value),
            "status": self.status,
            "provenance": self.provenance,
            "closed_form": num(self.closed_form),
            "discrepancy": num(self.discrepancy),
            "certificates": [c.to_dict() for c in self.certificates],
        }


def _entry(solver_value: float, closed: float | None, certs: Sequence[SolveCertificate] = (), status="finite") -> Entry:
    if closed is None:
        return Entry(solver_value, "solver", None, None, status, tuple(certs))
    disc = abs(solver_value - closed) if math.isfinite(solver_value) and math.isfinite(closed) else None
    return Entry(solver_value, "both", closed, disc, status, tuple(certs))


@dataclass(frozen=True)
class RateRow:
    """Irreversibility example at one ``(n, ε, δ, grid)``."""

    n: int
    eps: float
    delta: float
    grid: int
    W: Entry
    C: Entry
    Wbar: Entry
    Cbar: Entry
    cbar_analytic_infinite: bool
    lagrange_residual: float
    m_cap: float
    notes: tuple = ()

    def closed_form_deltas(self) -> dict:
        return {k: getattr(self, k).discrepancy for k in ("W", "C", "Wbar", "Cbar") if getattr(self, k).discrepancy is not None}

    @property
    def cbar_status(self) -> str:
        if self.Cbar.status == "infeasible_up_to_cap":
            tag = f"InfeasibleUpToCap({self.m_cap:g})"
            return tag + "+analytic_infinite" if self.cbar_analytic_infinite else tag
        return f"Finite({self.Cbar.value:.10g})"

    def within_tolerance(self, tol: float = TOL_CROSS) -> bool:
        return all(d <= tol for d in self.closed_form_deltas().values())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "delta": self.delta,
            "grid": self.grid,
            "W": self.W.to_dict(),
            "C": self.C.to_dict(),
            "Wbar": self.Wbar.to_dict(),
            "Cbar": self.Cbar.to_dict(),
            "Cbar_status": self.cbar_status,
            "cbar_analytic_infinite": self.cbar_analytic_infinite,
            "lagrange_residual": self.lagrange_residual,
            "m_cap": self.m_cap,
            "notes": list(self.notes),
        }

    def csv_row(self) -> dict:
        deltas = ";".join(f"{k}={v:.3e}" for k, v in self.closed_form_deltas().items())
        return {
            "n": self.n,
            "eps": self.eps,
            "delta": self.delta,
            "grid": self.grid,
            "W": f"{self.W.value:.12g}",
            "C": f"{self.C.value:.12g}",
            "Wbar": f"{self.Wbar.value:.12g}",
            "Cbar_status": self.cbar_status,
            "closed_form_deltas": deltas,
        }


CSV_COLUMNS = ("n", "eps", "delta", "grid", "W", "C", "Wbar", "Cbar_status", "closed_form_deltas")


@dataclass
class RateSweep:
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + ("error",), lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({**r.csv_row(), "error": ""})
        for params, msg in self.errors:
            w.writerow({**{k: params.get(k, "") for k in CSV_COLUMNS}, "error": msg})
        return buf.getvalue()


# -- the example ---------------------------------------------------------------


def irreversibility_sets(n: int, delta: float, grid: int) -> tuple[StateSet, StateSet]:
    """``P_n = {|1⟩⟨1|^⊗n}`` and ``E_n = {π_M^⊗n : M ∈ [2, 2+δ]}`` on a uniform M grid.

    For ``n = 1`` the family is a segment, so it is flagged convex (its hull
    is the set itself); for ``n ≥ 2`` it is a curve and stays finite.
    """
    base = {"family": "battery_interval", "params": {"M_lo": 2.0, "M_hi": 2.0 + delta}}
    sampler = Sampler("iid_power", {"base": base, "n": n}, grid)
    hull = Hull.CONVEX if n == 1 else Hull.FINITE
    p = StateSet.from_states([tensor_power(projector(1, 2), n)])
    return p, materialize(StateSet.from_sampler(sampler, hull=hull))


def lagrange_witness(n: int, ps: Sequence[float]) -> tuple[np.ndarray, float]:
    """Coefficients ``ℓ_i(1)`` with ``Σ ℓ_i(1) ρ_{p_i}^⊗n = |1⟩⟨1|^⊗n``, and the reconstruction error.

    ``ρ_p = (1 − p)|0⟩⟨0| + p|1⟩⟨1|``; uses the first ``n + 1`` points.
    """
    pts = np.asarray(ps[: n + 1], dtype=float)
    if len(pts) < n + 1 or len(set(pts)) < n + 1:
        raise BadParameter(f"need {n + 1} distinct points for a degree-{n} interpolation")
    coef = np.array([np.prod([(1 - pj) / (pi - pj) for j, pj in enumerate(pts) if j != i]) for i, pi in enumerate(pts)])
    target = tensor_power(projector(1, 2), n).matrix
    recon = sum(c * tensor_power(np.diag([1 - p, p]), n).matrix for c, p in zip(coef, pts))
    return coef, float(np.max(np.abs(recon - target)))


def cbar_closed_form_n1(eps: float, delta: float) -> float:
    """``βC̄`` for one copy: the segment runs from ``π_{2+δ}`` toward ``ω = diag(ε, 1 − ε)``
    and must stop at ``π_2``, so ``M = (1 − ε − p_lo)/(1/2 − p_lo)`` with ``p_lo = 1/(2 + δ)``."""
    p_lo = 1.0 / (2.0 + delta)
    return math.log2((1 - eps - p_lo) / (0.5 - p_lo))


def irreversibility_example(n: int, eps: float, delta: float, grid: int = 9,
                            m_cap: float = DEFAULT_M_CAP) -> RateRow:
    """All four work quantities of the irreversibility example at one ``n``.

    Closed forms: ``βW = −log₂(1 − ε)``, ``βC = n + log₂(1 − ε)``,
    ``βW̄ = n − log₂(1 − ε)``; ``βC̄`` is infinite for ``n ≥ 2`` (reported as
    infeasible up to ``m_cap`` together with the analytic flag).
    """
    if not (1 <= int(n) <= MAX_QUBITS):
        raise BadParameter(f"n must be in 1..{MAX_QUBITS}, got {n}")
    if not 0 <= eps < 0.5:
        raise BadParameter(f"eps must lie in [0, 0.5), got {eps}")
    if not delta > 0:
        raise BadParameter(f"delta must be positive, got {delta}")
    if grid < n + 1:
        raise BadParameter(f"grid must contain at least n + 1 = {n + 1} points")
    n = int(n)
    p, e = irreversibility_sets(n, delta, grid)
    lw = -math.log2(1 - eps)
    w = extractable_work(p, e, eps, Battery.CLEAN)
    wbar = extractable_work(p, e, eps, Battery.DIRTY)
    c = formation_cost(p, e.with_hull(Hull.FINITE), eps, Battery.CLEAN)
    cbar = formation_cost(p, e, eps, Battery.DIRTY, m_cap=m_cap)
    ps = 1.0 / np.linspace(2.0, 2.0 + delta, grid)
    _, resid = lagrange_witness(n, ps)
    certs = lambda r: r.divergence.certificates
    cbar_closed = cbar_closed_form_n1(eps, delta) if n == 1 else math.inf
    cbar_status = "finite" if math.isfinite(cbar.value) else "infeasible_up_to_cap"
    return RateRow(
        n=n,
        eps=eps,
        delta=delta,
        grid=grid,
        W=_entry(w.value, lw, certs(w)),
        C=_entry(c.value, n + math.log2(1 - eps), certs(c)),
        Wbar=_entry(wbar.value, n + lw, certs(wbar)),
        Cbar=_entry(cbar.value, cbar_closed, certs(cbar), cbar_status),
        cbar_analytic_infinite=n >= 2 and eps < 0.5,
        lagrange_residual=resid,
        m_cap=m_cap,
        notes=(ANALYTIC_CBAR_NOTE,) if n >= 2 else (),
    )


# -- optimal error at rate r ---------------------------------------------------


@dataclass(frozen=True)
class ErrorAtRate:
    value: float
    budget: float
    test: TestOperator | None
    certificate: SolveCertificate

    def to_dict(self) -> dict:
        return {
            "alpha": self.value,
            "type2_budget": self.budget,
            "test": None if self.test is None else format_matrix(self.test.matrix),
            "certificate": self.certificate.to_dict(),
        }


def optimal_error_at_rate(p: StateSet, e: StateSet, n: int, r: float) -> ErrorAtRate:
    """``α_{n,r}``: least worst-case type-I error with every type-II error ``≤ 2^{−nr}``.

    ``p`` and ``e`` are the already-formed n-copy sets.
    """
    if int(n) < 1 or r < 0:
        raise BadParameter("need n >= 1 and r >= 0")
    p, e = materialize(p), materialize(e)
    if p.dim != e.dim:
        raise DimMismatch("P and E have different dimensions")
    if p.dim > 64:
        raise BadParameter("optimal_error_at_rate supports dimension <= 64")
    budget = 2.0 ** (-int(n) * r)
    prob = SdpProblem("error_at_rate")
    test = prob.matrix("E", p.dim, interval=True, regularize=True)
    s = prob.scalar("s")
    for rho in p.matrices:
        prob.add_linear({test: -rho, s: -1.0}, "<=", -1.0)
    for tau in e.matrices:
        prob.add_linear({test: tau}, "<=", budget)
    prob.minimize({s: 1.0})
    sol, cert = prob.solve()
    if sol is None:
        raise BadParameter(f"error-at-rate program ended with status {cert.status.value}")
    return ErrorAtRate(min(1.0, max(0.0, sol[s])), budget, TestOperator(sol[test]), cert)


# -- exponents and relative-entropy rates --------------------------------------


def _finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class ExponentRow:
    n: int
    hoeffding_per_n: float
    relative_entropy_per_n: float
    provenance: str

    def to_dict(self) -> dict:
        return {"n": self.n, "hoeffding_per_n": _finite_or_none(self.hoeffding_per_n),
                "relative_entropy_per_n": _finite_or_none(self.relative_entropy_per_n), "provenance": self.provenance}


@dataclass(frozen=True)
class ExponentTable:
    r: float
    rows: tuple
    single_copy_relative_entropy: float
    approximate: bool = False
    caveat: str = ""

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "rows": [row.to_dict() for row in self.rows],
            "single_copy_relative_entropy": _finite_or_none(self.single_copy_relative_entropy),
            "r_below_relative_entropy": self.r < self.single_copy_relative_entropy,
            "approximate": self.approximate,
            "caveat": self.caveat,
        }


def _pair_rates(rho, tau, r: float, n: int) -> tuple[float, float, str]:
    h = hoeffding(rho, tau, n, r) / n
    d = rho.shape[0]
    if d**n <= MAX_TENSOR_DIM:
        rel = umegaki(tensor_power(rho, n), tensor_power(tau, n)) / n
        prov = "solver"
    else:
        rel = umegaki(rho, tau)
        prov = "closed-form"
    return h, rel, prov


def exponent_and_rates(rho: ArrayLike | StateSet, tau: ArrayLike | StateSet, r: float,
                       n_list: Iterable[int]) -> ExponentTable:
    """Per-n ``H_{n,r}/n`` and ``D(ρ^⊗n‖τ^⊗n)/n`` for i.i.d. inputs.

    Given state sets, each value is the minimum over generator pairs and the
    table is flagged approximate.
    """
    ns = [int(k) for k in n_list]
    if not ns or min(ns) < 1:
        raise BadParameter("n_list must contain positive integers")
    if isinstance(rho, StateSet) or isinstance(tau, StateSet):
        ps = materialize(rho if isinstance(rho, StateSet) else StateSet.from_states([rho]))
        es = materialize(tau if isinstance(tau, StateSet) else StateSet.from_states([tau]))
        pairs = [(a, b) for a in ps.matrices for b in es.matrices]
        approx = len(pairs) > 1
    else:
        pairs = [(make_density(rho).matrix, make_density(tau).matrix)]
        approx = False
    rows = []
    for n in ns:
        vals = [_pair_rates(a, b, r, n) for a, b in pairs]
        h = min(v[0] for v in vals)
        d = min(v[1] for v in vals)
        rows.append(ExponentRow(n, h, d, vals[0][2]))
    d1 = min(umegaki(a, b) for a, b in pairs)
    caveat = "composite sets: minima over generator pairs, not the regularized set quantity" if approx else ""
    return ExponentTable(r, tuple(rows), d1, approx, caveat)

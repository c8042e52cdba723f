"""Work extraction, formation, no-go verdicts and battery truncation.

Work values are ``βW`` and ``βC`` in bits; the inverse temperature never
enters numerically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channels import ChannelSpec, VerificationReport, verify_channel
from .divergences import (
    DEFAULT_M_CAP,
    DivergenceResult,
    d_max,
    d_max_segment,
    d_min,
    d_min_constrained,
)
from .errors import BadParameter, DimMismatch, VerificationFailed
from .gibbs import battery_gibbs
from .operators import ArrayLike, format_matrix, make_density, projector, trace_distance
from .sets import IntersectionResult, Sampler, StateSet, conv_aff_intersection, materialize, set_geometry

EXACT_TOL = 1e-7
DIRTY_M_SLACK = 1e-6
TRUNCATION_TOL = 1e-10
BOUNDARY_TOL = 1e-12
DEFAULT_M0 = 1e6


class Battery(str, enum.Enum):
    CLEAN = "clean"
    DIRTY = "dirty"


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    TRIVIALLY_ACHIEVABLE = "TriviallyAchievable"
    IMPOSSIBLE = "Impossible"
    THEOREM_SILENT = "TheoremSilent"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    INFEASIBLE_UP_TO_CAP = "InfeasibleUpToCap"
    NO_CHANNEL = "NoChannel"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class BatterySpec:
    m: float
    kind: Battery = Battery.CLEAN

    def __post_init__(self):
        if not self.m > 1:
            raise BadParameter(f"battery M must exceed 1, got {self.m}")
        object.__setattr__(self, "kind", Battery(self.kind))

    def state(self):
        return battery_gibbs(self.m)


@dataclass(frozen=True)
class TaskReport:
    """Value in bits, synthesized channel, its verification and a verdict."""

    task: str
    value: float
    verdict: Verdict
    channel: ChannelSpec | None = None
    verification: VerificationReport | None = None
    divergence: DivergenceResult | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "task": self.task,
            "value_bits": self.value if math.isfinite(self.value) else None,
            "value_status": "finite" if math.isfinite(self.value) else "infinite",
            "verdict": self.verdict.value,
            "witness": None if self.divergence is None else self.divergence.to_dict()["witness"],
            "channel": None if self.channel is None else self.channel.to_dict(),
            "verification": None if self.verification is None else self.verification.to_dict(),
            "certificates": [] if self.divergence is None else [c.to_dict() for c in self.divergence.certificates],
            "grid": None if self.divergence is None else self.divergence.grid,
        }
        out["details"] = _json_details(self.details)
        return out


def _json_details(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if hasattr(v, "to_dict"):
            out[k] = v.to_dict()
        elif isinstance(v, np.ndarray):
            out[k] = format_matrix(v) if v.ndim == 2 else [float(x) for x in v]
        elif isinstance(v, float) and not math.isfinite(v):
            out[k] = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        elif isinstance(v, (np.floating, np.integer)):
            out[k] = v.item()
        else:
            out[k] = v
    return out


def _singleton(x: ArrayLike) -> StateSet:
    return StateSet.from_states([x])


def _excited(d: int = 2):
    return projector(1, d)


# -- extraction ----------------------------------------------------------------


def extractable_work(p: StateSet, e: StateSet, eps: float, battery: Battery | str = Battery.CLEAN,
                     m0: float = DEFAULT_M0) -> TaskReport:
    """One-shot extractable work ``βW`` (clean) or ``βW̄`` (dirty) into a battery.

    Clean uses ``D_min,ε^E(P‖E)``, dirty uses ``D_min,ε(P‖E)``.  The channel
    ``tr[(I − E)·]|0⟩⟨0| + tr[E·]|1⟩⟨1|`` built from the optimal test sends
    every ``τ ∈ E`` to ``π_{1/tr[Eτ]}``.  When the optimal type-II error
    vanishes the value is infinite and the witness channel targets
    ``π_{m0}`` instead.

    Raises:
        VerificationFailed: the synthesized channel misses its targets.
    """
    battery = Battery(battery)
    p, e = materialize(p), materialize(e)
    res = d_min_constrained(p, e, e, eps) if battery is Battery.CLEAN else d_min(p, e, eps)
    test = res.test.matrix
    type2 = [float(np.real(np.trace(test @ t))) for t in e.matrices]
    ket1 = _excited()
    if res.finite:
        m_star = 2.0 ** res.value
        ch = ChannelSpec.measure_prepare(test, battery_gibbs(math.inf), ket1)
    else:
        m_star = m0
        ch = ChannelSpec.measure_prepare(test, battery_gibbs(m0), ket1)
    if battery is Battery.CLEAN:
        target_e = _singleton(battery_gibbs(m_star))
    else:
        # Π_{M*}: excited population at most 1/M*, checked against the continuous ray
        m_lo = max(m_star - DIRTY_M_SLACK, 1.0 + 1e-12)
        ray = Sampler("battery_ray", {"M_lo": m_lo, "M_cap": max(1e6, 10 * m_star)}, 2)
        target_e = StateSet.from_sampler(ray)
    report = verify_channel(ch, p, e, _singleton(ket1), target_e, eps, gibbs_tol=EXACT_TOL)
    details = {"M_star": m_star, "type2_per_generator": type2, "battery": battery.value}
    if not res.finite:
        details["note"] = f"optimal type-II error vanishes; channel shown for M0 = {m0:g}, any M0 works"
    verdict = Verdict.PASS if report.passed else Verdict.FAIL
    out = TaskReport("extract", res.value, verdict, ch, report, res, details)
    if not report.passed:
        raise VerificationFailed(f"extraction channel failed verification: {report.to_dict()}", out)
    return out


# -- formation -----------------------------------------------------------------


def formation_cost(p: StateSet, e: StateSet, eps: float, battery: Battery | str = Battery.CLEAN,
                   m_cap: float = DEFAULT_M_CAP, verify_grid: int = 9) -> TaskReport:
    """Work cost ``βC`` (clean) or ``βC̄`` (dirty) of preparing ``(P, E)``.

    Clean reports ``D_max,ε(P‖E)`` with its optimal pair; no channel is
    synthesized.  Dirty reports ``D_max,ε^E(P‖E)`` and builds
    ``F(·) = ⟨0|·|0⟩γ + ⟨1|·|1⟩ω``, verified on ``Π_{M*}`` sampled on
    ``[M*, m_cap]``.  A search that finds no ``M ≤ m_cap`` yields the verdict
    ``InfeasibleUpToCap``.
    """
    battery = Battery(battery)
    p, e = materialize(p), materialize(e)
    if battery is Battery.CLEAN:
        res = d_max(p, e, eps)
        verdict = Verdict.NO_CHANNEL if res.finite else Verdict.INFEASIBLE
        return TaskReport("form", res.value, verdict, None, None, res,
                          {"battery": "clean", "note": "channel synthesis for clean formation is not implemented"})
    res = d_max_segment(p, e, eps, m_cap)
    if not res.finite:
        return TaskReport("form", math.inf, Verdict.INFEASIBLE_UP_TO_CAP, None, None, res,
                          {"battery": "dirty", "m_cap": m_cap})
    w = res.witness
    m_star = max(float(w["M"]), 1.0 + 1e-9)
    ch = ChannelSpec("MeasurePrepare", (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), (w["gamma"], w["omega"]))
    src_e = StateSet.from_sampler(
        Sampler("battery_ray", {"M_lo": m_star, "M_cap": max(m_cap, 2 * m_star), "include_limit": True}, verify_grid)
    )
    report = verify_channel(ch, _singleton(_excited()), src_e, p, e, eps)
    verdict = Verdict.PASS if report.passed else Verdict.FAIL
    out = TaskReport("form", res.value, verdict, ch, report, res, {"battery": "dirty", "M_star": float(w["M"])})
    if not report.passed:
        raise VerificationFailed(f"formation channel failed verification: {report.to_dict()}", out)
    return out


# -- no-go verdicts ------------------------------------------------------------


@dataclass(frozen=True)
class NogoResult:
    verdict: Verdict
    threshold: float
    eps: float
    intersection: IntersectionResult
    channel: ChannelSpec | None = None
    mode: str = "conv"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "threshold": self.threshold,
            "eps": self.eps,
            "mode": self.mode,
            "intersection": self.intersection.to_dict(),
            "channel": None if self.channel is None else self.channel.to_dict(),
        }


def nogo_purification(p: StateSet, e: StateSet, target_rho: ArrayLike, target_tau: ArrayLike,
                      eps: float) -> NogoResult:
    """Purification no-go: under ``conv(P) ∩ aff(E) ≠ ∅`` the conversion to
    ``(ρ′, τ′)`` is possible iff ``ε ≥ T(ρ′, τ′)``, achieved by ``tr(·)τ′``.

    For ``ε = 0`` the hypothesis relaxes to ``aff(P) ∩ aff(E) ≠ ∅``.  Without
    the hypothesis the verdict is ``TheoremSilent``.
    """
    p, e = materialize(p), materialize(e)
    rho_t, tau_t = make_density(target_rho), make_density(target_tau)
    if rho_t.dim != tau_t.dim:
        raise DimMismatch("target states have different dimensions")
    inter = conv_aff_intersection(p, e, "conv")
    mode = "conv"
    if not inter.feasible and eps == 0.0:
        inter = conv_aff_intersection(p, e, "aff")
        mode = "aff"
    thr = trace_distance(rho_t, tau_t)
    if not inter.feasible:
        return NogoResult(Verdict.THEOREM_SILENT, thr, eps, inter, None, mode)
    if eps >= thr:
        ch = ChannelSpec.replacer(tau_t, p.dim)
        return NogoResult(Verdict.TRIVIALLY_ACHIEVABLE, thr, eps, inter, ch, mode)
    return NogoResult(Verdict.IMPOSSIBLE, thr, eps, inter, None, mode)


# -- truncation ----------------------------------------------------------------


@dataclass(frozen=True)
class TruncationResult:
    verdict: Verdict
    m: float
    n: float
    eps: float
    q: float | None = None
    channel: ChannelSpec | None = None
    verification: VerificationReport | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "feasible": self.verdict is Verdict.FEASIBLE,
            "M": self.m,
            "N": self.n,
            "eps": self.eps,
            "threshold": self.n * (1 - self.eps),
            "q": self.q,
            "channel": None if self.channel is None else self.channel.to_dict(),
            "verification": None if self.verification is None else self.verification.to_dict(),
            "certificate": "closed-form",
        }


def truncation(m: float, n: float, eps: float) -> TruncationResult:
    """Clean battery ``π_M`` to ``(|1⟩⟨1|, π_N)`` within ``ε``: feasible iff ``M ≥ N(1 − ε)``.

    Below ``ε = 1 − 1/N`` the channel measures in the energy basis and
    prepares ``γ₀ = (1 − q)|0⟩⟨0| + q|1⟩⟨1|`` or ``γ₁ = ε|0⟩⟨0| + (1 − ε)|1⟩⟨1|``
    with ``q = (M − N(1 − ε))/(N(M − 1))``; otherwise the replacer onto ``π_N``.
    """
    if not (m > 1 and n > 1) or not (math.isfinite(m) and math.isfinite(n)):
        raise BadParameter(f"truncation needs finite M, N > 1, got M={m}, N={n}")
    if not 0 <= eps < 1:
        raise BadParameter(f"eps must lie in [0, 1), got {eps}")
    if m < n * (1 - eps) - BOUNDARY_TOL:
        return TruncationResult(Verdict.INFEASIBLE, m, n, eps)
    pi_n = battery_gibbs(n)
    ket1 = _excited()
    if eps >= 1 - 1 / n:
        ch = ChannelSpec.replacer(pi_n, 2)
        q = None
    else:
        q = max(0.0, (m - n * (1 - eps)) / (n * (m - 1)))
        g0 = np.diag([1 - q, q])
        g1 = np.diag([eps, 1 - eps])
        ch = ChannelSpec("MeasurePrepare", (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), (g0, g1))
    rep = verify_channel(ch, _singleton(ket1), _singleton(battery_gibbs(m)), _singleton(ket1), _singleton(pi_n),
                         eps, gibbs_tol=TRUNCATION_TOL)
    if not rep.passed:
        raise VerificationFailed(f"truncation channel failed verification: {rep.to_dict()}")
    return TruncationResult(Verdict.FEASIBLE, m, n, eps, q, ch, rep)


@dataclass(frozen=True)
class DirtyTruncationResult:
    verdict: Verdict
    threshold: float
    cross_check: NogoResult

    @property
    def consistent(self) -> bool:
        return self.cross_check.verdict is self.verdict

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "threshold": self.threshold,
            "consistent": self.consistent,
            "cross_check": self.cross_check.to_dict(),
        }


def dirty_truncation_nogo(m1: float, m2: float, n: float, eps: float) -> DirtyTruncationResult:
    """Dirty battery ``(|1⟩⟨1|, {π_{m1}, π_{m2}})`` to clean ``π_N``: achievable iff ``ε ≥ 1 − 1/N``.

    Cross-checked with :func:`nogo_purification`, whose hypothesis holds
    because ``|1⟩⟨1|`` lies in the affine hull of two distinct battery states.
    """
    if not (m2 > m1 >= n > 1):
        raise BadParameter(f"need m2 > m1 >= n > 1, got m1={m1}, m2={m2}, n={n}")
    thr = 1 - 1 / n
    verdict = Verdict.TRIVIALLY_ACHIEVABLE if eps >= thr else Verdict.IMPOSSIBLE
    ket1 = _excited()
    check = nogo_purification(_singleton(ket1), StateSet.from_states([battery_gibbs(m1), battery_gibbs(m2)]),
                              ket1, battery_gibbs(n), eps)
    return DirtyTruncationResult(verdict, thr, check)


# -- geometric lower bound -----------------------------------------------------


@dataclass(frozen=True)
class LowerBound:
    value: float
    status: str
    separation: float
    diameter: float
    convention: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "value_bits": self.value if math.isfinite(self.value) else None,
            "status": self.status,
            "separation": self.separation,
            "diameter": self.diameter,
            "convention": self.convention,
            "note": self.note,
        }


def formation_lower_bound(p: StateSet, e: StateSet, eps: float) -> LowerBound:
    """Geometric bound ``βC̄ ≥ log₂((T(P, E) − ε)/diam(E))``.

    Zero when ``T(P, E) ≤ ε`` (a replacer onto a state of ``E`` costs
    nothing); infinite when ``E`` has zero diameter and ``T(P, E) > ε``.
    """
    g = set_geometry(p, e)
    if g.separation <= eps:
        return LowerBound(0.0, "zero", g.separation, g.diameter, g.convention,
                          "B_eps(P) meets E; a replacer achieves zero cost")
    if g.diameter <= 0.0:
        return LowerBound(math.inf, "infinite", g.separation, g.diameter, g.convention)
    return LowerBound(math.log2((g.separation - eps) / g.diameter), "finite", g.separation, g.diameter, g.convention)

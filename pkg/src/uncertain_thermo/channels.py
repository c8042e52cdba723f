"""Measure-and-prepare channels and their verification against set conversions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .divergences import TestOperator
from .errors import BadParameter, DimMismatch
from .operators import ArrayLike, as_matrix, format_matrix, make_density, trace_distance
from .sets import Curve, Hull, StateSet, hull_trace_distance, materialize

EFFECT_SUM_TOL = 1e-8
EXACT_TOL = 1e-7


class ChannelKind(str, enum.Enum):
    MEASURE_PREPARE = "MeasurePrepare"
    REPLACER = "Replacer"


@dataclass(frozen=True)
class ChannelSpec:
    """``F(X) = Σ_k tr[E_k X] σ_k`` with effects summing to the identity.

    Example:
        >>> ch = ChannelSpec.replacer(np.eye(2) / 2, input_dim=2)
        >>> ch.apply(np.diag([1.0, 0.0])).real
        array([[0.5, 0. ],
               [0. , 0.5]])
    """

    kind: ChannelKind
    effects: tuple
    outputs: tuple

    def __post_init__(self):
        effects = tuple(e if isinstance(e, TestOperator) else TestOperator(e) for e in self.effects)
        outputs = tuple(make_density(o) for o in self.outputs)
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outputs", outputs)
        if not effects or len(effects) != len(outputs):
            raise BadParameter("a channel needs one output state per effect")
        if len({e.dim for e in effects}) > 1 or len({o.dim for o in outputs}) > 1:
            raise DimMismatch("effects (or outputs) have inconsistent dimensions")
        total = sum(e.matrix for e in effects)
        err = float(np.max(np.abs(total - np.eye(effects[0].dim))))
        if err > EFFECT_SUM_TOL:
            raise BadParameter(f"effects sum to identity only within {err:.3g}")

    @classmethod
    def measure_prepare(cls, test: ArrayLike, out_reject: ArrayLike, out_accept: ArrayLike) -> "ChannelSpec":
        """``tr[(I − E)·] σ₀ + tr[E ·] σ₁``."""
        e = as_matrix(test)
        return cls(ChannelKind.MEASURE_PREPARE, (np.eye(e.shape[0]) - e, e), (out_reject, out_accept))

    @classmethod
    def replacer(cls, output: ArrayLike, input_dim: int) -> "ChannelSpec":
        """``tr(·) σ``."""
        return cls(ChannelKind.REPLACER, (np.eye(input_dim),), (output,))

    @property
    def input_dim(self) -> int:
        return self.effects[0].dim

    @property
    def output_dim(self) -> int:
        return self.outputs[0].dim

    def apply(self, x: ArrayLike) -> np.ndarray:
        m = as_matrix(x)
        if m.shape[0] != self.input_dim:
            raise DimMismatch(f"channel input dim {self.input_dim}, got {m.shape[0]}")
        return sum(float(np.real(np.trace(e.matrix @ m))) * o.matrix for e, o in zip(self.effects, self.outputs))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "effects": [format_matrix(e.matrix) for e in self.effects],
            "outputs": [format_matrix(o.matrix) for o in self.outputs],
        }


@dataclass(frozen=True)
class VerificationReport:
    gibbs_residuals: tuple
    state_errors: tuple
    gibbs_tol: float
    state_tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "gibbs_residuals": [float(x) for x in self.gibbs_residuals],
            "state_errors": [float(x) for x in self.state_errors],
            "gibbs_tol": self.gibbs_tol,
            "state_tol": self.state_tol,
            "passed": self.passed,
        }


def distance_to_set(x: np.ndarray, target: StateSet) -> float:
    """Trace distance from ``x`` to a target set in its own representation.

    One-parameter samplers use the continuous curve, ``convex`` sets their
    hull, everything else the nearest generator.
    """
    best = min(trace_distance(x, g) for g in target.matrices) if len(target) else math.inf
    if target.sampler is not None and target.sampler.one_parameter and target.hull is Hull.FINITE:
        best = min(best, Curve(target.sampler).distance(x))
    elif target.hull is not Hull.FINITE and len(target) > 1:
        best = min(best, hull_trace_distance(target.matrices, [x])[0])
    return best


def representation_tolerance(target: StateSet) -> float:
    """``1e-7`` for exactly represented targets, the grid resolution otherwise."""
    s = target.sampler
    if s is None or s.one_parameter or target.hull is Hull.CONVEX and s.family == "battery_interval":
        return EXACT_TOL
    return max(EXACT_TOL, s.resolution())


def verify_channel(
    ch: ChannelSpec,
    p: StateSet,
    e: StateSet,
    target_p: StateSet,
    target_e: StateSet,
    eps: float,
    gibbs_tol: float | None = None,
) -> VerificationReport:
    """Check ``T(F(ρ), P′) ≤ ε`` for every ``ρ ∈ P`` and ``F(τ) ∈ E′`` for every ``τ ∈ E``.

    Residuals are distances to the nearest target element; the Gibbs
    tolerance defaults to :func:`representation_tolerance` of ``target_e``.
    """
    p, e, target_p, target_e = (materialize(s) for s in (p, e, target_p, target_e))
    if p.dim != ch.input_dim or e.dim != ch.input_dim:
        raise DimMismatch("channel input dimension does not match the source sets")
    if target_p.dim != ch.output_dim or target_e.dim != ch.output_dim:
        raise DimMismatch("channel output dimension does not match the target sets")
    gtol = representation_tolerance(target_e) if gibbs_tol is None else gibbs_tol
    stol = eps + EXACT_TOL
    gibbs = tuple(distance_to_set(ch.apply(t), target_e) for t in e.matrices)
    state = tuple(distance_to_set(ch.apply(r), target_p) for r in p.matrices)
    passed = all(g <= gtol for g in gibbs) and all(s <= stol for s in state)
    return VerificationReport(gibbs, state, gtol, stol, passed)

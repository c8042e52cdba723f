"""Independent reference computations used by the tests.

None of these call the package's solver layer; LPs go through HiGHS and the
rest are closed forms or dense one-dimensional scans.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog


def dmin_diagonal_lp(ps: list[np.ndarray], qs: list[np.ndarray], eps: float) -> float:
    """``D_min,ε`` for commuting (diagonal) sets via an LP over diagonal tests.

    Variables ``x ∈ [0, 1]^d`` (test diagonal) and ``t``: minimize ``t`` with
    ``x·q_j ≤ t`` and ``x·p_i ≥ 1 − ε``.
    """
    d = len(ps[0])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    a_ub, b_ub = [], []
    for q in qs:
        a_ub.append(np.append(q, -1.0))
        b_ub.append(0.0)
    for p in ps:
        a_ub.append(np.append(-p, 0.0))
        b_ub.append(-(1.0 - eps))
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=[(0, 1)] * d + [(0, None)], method="highs")
    assert res.status == 0
    return math.inf if res.fun <= 1e-14 else -math.log2(res.fun)


def dmax_diagonal_eps0(p: np.ndarray, q: np.ndarray) -> float:
    """``log₂ max_i p_i/q_i`` (``inf`` when some ``p_i > 0`` has ``q_i = 0``)."""
    ratios = [pi / qi if qi > 0 else (math.inf if pi > 0 else 0.0) for pi, qi in zip(p, q)]
    return math.log2(max(ratios))


def segment_geometry_1d(e_lo: float, e_hi: float, w_lo: float, points: int = 2001) -> float:
    """Least ``M`` for a diagonal qubit segment problem, scanned on a dense grid.

    Equilibrium states are excited populations ``g ∈ [e_lo, e_hi]``; smoothed
    states ``w ∈ [w_lo, 1]`` with ``w > e_hi``.  The segment from ``g`` toward
    ``w`` stays inside while ``λ ≤ (e_hi − g)/(w − g)``; returns ``log₂ M``
    with ``1/M`` the largest admissible ``λ``.
    """
    g = np.linspace(e_lo, e_hi, points)[:, None]
    w = np.linspace(w_lo, 1.0, points)[None, :]
    lam = (e_hi - g) / (w - g)
    return math.log2(1.0 / float(lam.max()))


def hoeffding_diagonal_grid(p: np.ndarray, q: np.ndarray, r: float, points: int = 200001) -> float:
    """``sup_α ((α − 1) r − log₂ Σ p^α q^{1−α}) / α`` on a dense α grid in ``(0, 1)``."""
    a = np.linspace(1e-4, 1 - 1e-4, points)
    qa = np.sum(p[None, :] ** a[:, None] * q[None, :] ** (1 - a[:, None]), axis=1)
    return float(np.max(((a - 1) * r - np.log2(qa)) / a))


def battery_excited(m: float) -> float:
    """Excited population ``1/M`` of the battery Gibbs state ``π_M``."""
    return 1.0 / m


def error_at_rate_diagonal_lp(p, q, budget):
    """Least type-I error over diagonal tests with type-II error at most ``budget``."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    res = linprog(-p, A_ub=[q], b_ub=[budget], bounds=[(0, 1)] * len(p), method="highs")
    return 1.0 + float(res.fun)

"""Gibbs (thermal) states: generic Hamiltonians, the two-level battery, a qubit in a field."""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from .errors import BadParameter
from .operators import ArrayLike, DensityOperator, HermitianOperator, spectrum

EXP_RANGE_LIMIT = 700.0

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class GibbsOverflowWarning(RuntimeWarning):
    """β times the spectral range is large enough that exp would overflow."""


def gibbs_from_hamiltonian(h: ArrayLike, beta: float) -> DensityOperator:
    """Thermal state ``exp(-βH) / tr exp(-βH)``.

    The spectrum is shifted by its minimum before exponentiating, so large
    ``β·(E_max − E_min)`` never overflows; a :class:`GibbsOverflowWarning`
    is emitted when it exceeds 700 since the highest levels then underflow
    to zero population.
    """
    if not beta > 0 or not math.isfinite(beta):
        raise BadParameter(f"beta must be positive and finite, got {beta}")
    op = h if isinstance(h, HermitianOperator) else HermitianOperator(h)
    if not np.all(np.isfinite(op.matrix)):
        raise BadParameter("Hamiltonian has non-finite entries")
    sp = spectrum(op)
    lam = sp.eigenvalues
    spread = beta * (lam.max() - lam.min())
    if spread > EXP_RANGE_LIMIT:
        warnings.warn(
            f"beta*spectral range = {spread:.3g} exceeds {EXP_RANGE_LIMIT}; rescaled before exponentiating",
            GibbsOverflowWarning,
            stacklevel=2,
        )
    w = np.exp(-beta * (lam - lam.min()))
    w /= w.sum()
    u = sp.eigenvectors
    m = (u * w) @ u.conj().T
    return DensityOperator._trusted(0.5 * (m + m.conj().T))


def battery_hamiltonian(m: float, beta: float = 1.0) -> np.ndarray:
    """Two-level battery with gap ``(1/β) ln(M − 1)``; its Gibbs state is ``π_M``."""
    _check_m(m)
    return np.diag([0.0, math.log(m - 1.0) / beta]).astype(complex)


def battery_gibbs(m: float) -> DensityOperator:
    """``π_M = (1 − 1/M)|0⟩⟨0| + (1/M)|1⟩⟨1|``.

    ``m = inf`` gives the limit ``|0⟩⟨0|``.
    """
    if m == math.inf:
        return DensityOperator._trusted(np.diag([1.0, 0.0]).astype(complex))
    _check_m(m)
    return DensityOperator._trusted(np.diag([1.0 - 1.0 / m, 1.0 / m]).astype(complex))


def battery_excited_population(m: float) -> float:
    return 0.0 if m == math.inf else 1.0 / m


def battery_m_from_state(state: ArrayLike) -> float:
    """Recover ``M`` from a diagonal battery Gibbs state (``inf`` for ``|0⟩⟨0|``)."""
    p1 = float(np.real(np.asarray(state)[1, 1]))
    return math.inf if p1 <= 0 else 1.0 / p1


def _check_m(m: float) -> None:
    if not (m > 1) or not math.isfinite(m):
        raise BadParameter(f"battery parameter M must be a finite real > 1, got {m}")


def qubit_field_hamiltonian(h: Sequence[float]) -> np.ndarray:
    """``H(h) = −h·σ``."""
    hv = _field(h)
    return -sum(c * s for c, s in zip(hv, _PAULI))


def bloch_state(r: Sequence[float]) -> DensityOperator:
    r = np.asarray(r, dtype=float)
    if np.linalg.norm(r) > 1 + 1e-12:
        raise BadParameter("Bloch vector longer than 1")
    m = 0.5 * (np.eye(2, dtype=complex) + sum(c * s for c, s in zip(r, _PAULI)))
    return DensityOperator._trusted(m)


def qubit_field_bloch(h: Sequence[float], beta: float) -> np.ndarray:
    """Bloch vector ``tanh(β|h|) h/|h|`` (zero for ``h = 0``)."""
    hv = _field(h)
    if not beta > 0:
        raise BadParameter(f"beta must be positive, got {beta}")
    norm = float(np.linalg.norm(hv))
    if norm == 0.0:
        return np.zeros(3)
    return math.tanh(beta * norm) * hv / norm


def qubit_field_gibbs(h: Sequence[float], beta: float) -> DensityOperator:
    """Gibbs state of ``−h·σ`` built from its Bloch vector, no matrix exponential."""
    return bloch_state(qubit_field_bloch(h, beta))


def _field(h: Sequence[float]) -> np.ndarray:
    hv = np.asarray(h, dtype=float)
    if hv.shape != (3,) or not np.all(np.isfinite(hv)):
        raise BadParameter(f"field must be a finite 3-vector, got {h!r}")
    return hv

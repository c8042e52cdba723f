"""Dense Hermitian operators, density operators and spectral calculus.

Every spectral quantity (norms, powers, logarithms, exponentials) goes
through one Hermitian eigendecomposition.  Matrices are stored as
``complex128`` arrays, i.e. pairs of 64-bit floats.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    DimMismatch,
    DimTooLarge,
    DomainError,
    NotHermitian,
    NotPSD,
    NotSquare,
    TraceMismatch,
)

TOL_HERM = 1e-10
TOL_PSD = 1e-9
TOL_TRACE = 1e-10
TOL_SUPP = 1e-12
# beyond these the input is rejected instead of repaired
REPAIR_HERM = 1e-6
REPAIR_PSD = 1e-6
REPAIR_TRACE = 1e-6
MAX_DIM = 4096

ArrayLike = Union[np.ndarray, Sequence, "HermitianOperator"]


def as_matrix(x: ArrayLike) -> np.ndarray:
    """Return ``x`` as a square complex matrix (no copy when possible)."""
    if isinstance(x, HermitianOperator):
        return x.matrix
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def _readonly(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex, copy=True)
    m.setflags(write=False)
    return m


class HermitianOperator:
    """Immutable Hermitian matrix.

    Small asymmetries (up to ``1e-6``) are removed by symmetrization;
    anything larger raises :class:`NotHermitian`.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix: ArrayLike):
        m = as_matrix(matrix)
        if m.shape[0] < 1:
            raise NotSquare("dimension must be at least 1")
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym > REPAIR_HERM:
            raise NotHermitian(f"asymmetry {asym:.3g} exceeds {REPAIR_HERM}")
        self._m = _readonly(0.5 * (m + m.conj().T))

    @classmethod
    def _trusted(cls, matrix: np.ndarray):
        obj = cls.__new__(cls)
        obj._m = _readonly(matrix)
        return obj

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    def is_real(self, tol: float = 1e-14) -> bool:
        return bool(np.max(np.abs(self._m.imag), initial=0.0) <= tol)

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self._m - np.diag(np.diag(self._m))
        return bool(np.max(np.abs(off), initial=0.0) <= tol)


class DensityOperator(HermitianOperator):
    """Validated quantum state: Hermitian, positive semidefinite, unit trace.

    Eigenvalues in ``[-1e-9, 0)`` are clipped silently, those in
    ``[-1e-6, -1e-9)`` are clipped and ``clip_warning`` is set; anything
    more negative raises :class:`NotPSD`.  A trace within ``1e-6`` of one is
    renormalized.
    """

    __slots__ = ("clip_warning",)

    def __init__(self, raw: ArrayLike):
        super().__init__(raw)
        m = self._m
        evals, evecs = np.linalg.eigh(m)
        lo = evals[0]
        if lo < -REPAIR_PSD:
            raise NotPSD(f"minimum eigenvalue {lo:.3g} below {-REPAIR_PSD}")
        self.clip_warning = bool(lo < -TOL_PSD)
        if lo < 0:
            clipped = np.clip(evals, 0.0, None)
            m = (evecs * clipped) @ evecs.conj().T
            m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > REPAIR_TRACE:
            raise TraceMismatch(f"trace {tr:.8g} differs from 1 by more than {REPAIR_TRACE}")
        self._m = _readonly(m / tr)

    @classmethod
    def _trusted(cls, matrix: np.ndarray):
        obj = super()._trusted(matrix)
        obj.clip_warning = False
        return obj


def make_density(raw: ArrayLike) -> DensityOperator:
    """Validate and repair ``raw`` into a :class:`DensityOperator`."""
    if isinstance(raw, DensityOperator):
        return raw
    return DensityOperator(raw)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def spectrum(h: ArrayLike) -> Spectrum:
    m = as_matrix(h)
    evals, evecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return Spectrum(evals[::-1].copy(), evecs[:, ::-1].copy())


def trace_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Half the trace norm of ``a - b``."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimMismatch(f"dimensions differ: {ma.shape} vs {mb.shape}")
    d = ma - mb
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def trace_norm(a: ArrayLike) -> float:
    m = as_matrix(a)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def tensor_power(rho: ArrayLike, n: int) -> DensityOperator:
    """Kronecker power ``rho^{⊗n}``; output dimension is capped at 4096."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    m = as_matrix(rho)
    if m.shape[0] ** n > MAX_DIM:
        raise DimTooLarge(f"{m.shape[0]}^{n} exceeds the {MAX_DIM} dimension guard")
    out = functools.reduce(np.kron, [m] * n)
    return DensityOperator._trusted(out)


def tensor(*ops: ArrayLike) -> np.ndarray:
    return functools.reduce(np.kron, [as_matrix(o) for o in ops])


def herm_function(
    h: ArrayLike,
    func: Union[str, Callable[[np.ndarray], np.ndarray]],
    param: float | None = None,
    *,
    support_restricted: bool = False,
) -> HermitianOperator:
    """Apply a scalar function to the eigenvalues of ``h``.

    Args:
        h: Hermitian matrix.
        func: ``"power"`` (needs ``param``), ``"log"`` (base 2), ``"ln"``,
            ``"exp"``, or a vectorized callable.
        param: exponent for ``"power"``.
        support_restricted: for logarithms, drop eigenvalues at or below
            ``1e-12`` (they map to 0) instead of raising.

    Raises:
        DomainError: logarithm of a numerically zero eigenvalue outside
            support-restricted mode, or a fractional power of a negative
            eigenvalue.
    """
    sp = spectrum(h)
    lam = sp.eigenvalues
    if callable(func):
        vals = func(lam)
    elif func == "power":
        if param is None:
            raise ValueError("power needs an exponent")
        if float(param).is_integer():
            vals = lam ** int(param)
            if param < 0 and np.any(np.abs(lam) <= TOL_SUPP):
                raise DomainError("negative power of a singular operator")
        else:
            if lam.min() < -TOL_PSD:
                raise DomainError("fractional power of an operator with negative eigenvalues")
            lam = np.where(lam <= TOL_SUPP, 0.0, lam)
            with np.errstate(divide="ignore"):
                vals = np.where(lam > 0, np.abs(lam) ** param, 0.0)
            if param < 0 and np.any(lam == 0):
                raise DomainError("negative power of a singular operator")
    elif func in ("log", "ln"):
        supp = lam > TOL_SUPP
        if not supp.all() and not support_restricted:
            raise DomainError("logarithm of a numerically zero eigenvalue")
        logf = np.log2 if func == "log" else np.log
        vals = np.zeros_like(lam)
        vals[supp] = logf(lam[supp])
    elif func == "exp":
        vals = np.exp(lam)
    else:
        raise ValueError(f"unknown function {func!r}")
    u = sp.eigenvectors
    return HermitianOperator._trusted((u * vals) @ u.conj().T)


def support_projector(h: ArrayLike, tol: float = 1e-10) -> np.ndarray:
    sp = spectrum(h)
    u = sp.eigenvectors[:, sp.eigenvalues > tol]
    return u @ u.conj().T


def ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def projector(i: int, d: int) -> DensityOperator:
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1.0
    return DensityOperator._trusted(m)


def maximally_mixed(d: int) -> DensityOperator:
    return DensityOperator._trusted(np.eye(d, dtype=complex) / d)


def diag_state(probs: Sequence[float]) -> DensityOperator:
    return make_density(np.diag(np.asarray(probs, dtype=float)))


@functools.lru_cache(maxsize=32)
def _hermitian_basis(d: int) -> tuple:
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            mats += [s, a]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1.0
        g[l, l] = -l
        mats.append(g / np.sqrt(l * (l + 1)))
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


def hermitian_basis(d: int) -> tuple:
    """Orthonormal (Hilbert-Schmidt) Hermitian basis: ``I/sqrt(d)`` then
    normalized generalized Gell-Mann matrices."""
    return _hermitian_basis(d)


def hs_coordinates(x: ArrayLike) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in :func:`hermitian_basis`."""
    m = as_matrix(x)
    d = m.shape[0]
    stack = np.array(hermitian_basis(d))
    return np.real(np.einsum("kij,ji->k", stack, m))


def from_hs_coordinates(c: np.ndarray, d: int) -> np.ndarray:
    stack = np.array(hermitian_basis(d))
    return np.einsum("k,kij->ij", np.asarray(c, dtype=float), stack)


# -- matrix literal format: nested arrays of [re, im] pairs, row-major --------


def parse_matrix(literal) -> np.ndarray:
    """Parse a nested-list matrix literal.

    Entries are ``[re, im]`` pairs; bare real numbers are accepted as a
    shorthand for ``[x, 0]``.
    """
    if not isinstance(literal, (list, tuple)) or not literal:
        raise NotSquare("matrix literal must be a non-empty list of rows")
    rows = []
    for row in literal:
        if not isinstance(row, (list, tuple)):
            raise NotSquare("each matrix row must be a list")
        out = []
        for entry in row:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ValueError("complex entries must be [re, im] pairs")
                out.append(complex(float(entry[0]), float(entry[1])))
            elif isinstance(entry, (int, float)) and not isinstance(entry, bool):
                out.append(complex(float(entry), 0.0))
            else:
                raise ValueError(f"invalid matrix entry {entry!r}")
        rows.append(out)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NotSquare(f"matrix literal is not square ({n} rows, row lengths {[len(r) for r in rows]})")
    return np.array(rows, dtype=complex)


def format_matrix(m: ArrayLike) -> list:
    arr = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]

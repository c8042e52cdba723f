"""Small dense SDP/LP modeling layer with independently checked certificates.

Problems are assembled from Hermitian matrix variables and real scalar
variables, compiled to the conic standard form

    minimize    ½ xᵀPx + qᵀx
    subject to  Ax + s = b,  s ∈ K

and handed to Clarabel (a primal-dual interior-point method with
Nesterov-Todd scaling).  The returned point is decoded and every constraint
is re-evaluated in matrix form; the duality gap is recomputed from the
primal point and the dual multipliers.  Only a point that passes both checks
is reported as ``Optimal``.  The gap is normalized by ``max(1, |objective|)``.
A point that fails the checks is re-solved with tighter linear-system
refinement before the failure is reported.

Linear expressions are dictionaries mapping variables to coefficients:

* scalar-valued expressions: a :class:`MatrixVar` maps to a Hermitian
  matrix ``A`` (contributing ``Re tr[A X]``), a :class:`ScalarVar` maps to a
  float;
* matrix-valued expressions: a :class:`MatrixVar` maps to a real scalar
  ``c`` (contributing ``c X``), a :class:`ScalarVar` maps to a Hermitian
  matrix ``B`` (contributing ``s B``).
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import clarabel
import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .config import ipm_tolerance
from .errors import BadParameter, IllConditioned, MaxIter

TOL_GAP = 1e-7
TOL_FEAS = 1e-8
INFEAS_MARGIN = 1e-9
MAX_VAR_DIM = 64
TIE_BREAK_MU = 1e-10
RETRY_SETTINGS: tuple[dict, ...] = (
    {},
    {"iterative_refinement_reltol": 1e-14, "iterative_refinement_abstol": 1e-14,
     "iterative_refinement_max_iter": 50, "equilibrate_max_iter": 50},
    {"equilibrate_enable": False},
)

_SQRT2 = math.sqrt(2.0)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"


@dataclass(frozen=True)
class SolveCertificate:
    status: Status
    primal_value: float
    dual_value: float
    gap: float
    residual: float
    iterations: int
    dual_residual: float = float("nan")
    infeasibility_margin: float = float("nan")
    solver_status: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "status": self.status.value,
            "primal_value": num(self.primal_value),
            "dual_value": num(self.dual_value),
            "gap": num(self.gap),
            "residual": num(self.residual),
            "dual_residual": num(self.dual_residual),
            "infeasibility_margin": num(self.infeasibility_margin),
            "iterations": self.iterations,
            "solver_status": self.solver_status,
        }


_LOG: contextvars.ContextVar[list | None] = contextvars.ContextVar("certificate_log", default=None)


@contextlib.contextmanager
def record_certificates() -> Iterator[list[SolveCertificate]]:
    """Collect every certificate produced inside the block."""
    parent = _LOG.get()
    log: list[SolveCertificate] = []
    token = _LOG.set(log)
    try:
        yield log
    finally:
        _LOG.reset(token)
        if parent is not None:
            parent.extend(log)


def log_certificate(cert: SolveCertificate) -> None:
    """Append ``cert`` to the active :func:`record_certificates` log, if any."""
    log = _LOG.get()
    if log is not None:
        log.append(cert)


# -- variables -----------------------------------------------------------------


@dataclass(eq=False)
class MatrixVar:
    name: str
    dim: int
    psd: bool = False
    interval: bool = False
    regularize: bool = False
    _offset: int = field(default=-1, repr=False)
    _size: int = field(default=0, repr=False)

    def __hash__(self):
        return id(self)


@dataclass(eq=False)
class ScalarVar:
    name: str
    lb: float | None = None
    ub: float | None = None
    _offset: int = field(default=-1, repr=False)

    def __hash__(self):
        return id(self)


Var = MatrixVar | ScalarVar


@dataclass
class _Linear:
    terms: dict
    sense: str
    rhs: float


@dataclass
class _MatrixCon:
    terms: dict
    const: np.ndarray | None
    kind: str  # "psd" | "eq"
    dim: int


class Solution(Mapping):
    """Decoded optimal point; index with the variable objects."""

    def __init__(self, values: dict):
        self._values = values

    def __getitem__(self, var):
        return self._values[var]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)


# -- parametrization of Hermitian matrices -------------------------------------


def _n_params(d: int, real: bool) -> int:
    return d * (d + 1) // 2 if real else d * d


def _triu(d: int):
    return np.triu_indices(d, 1)


def _coords(m: np.ndarray, real: bool) -> np.ndarray:
    """Real coordinates (diag, Re upper, [Im upper]) of a Hermitian matrix."""
    iu = _triu(m.shape[0])
    parts = [np.real(np.diag(m)), np.real(m[iu])]
    if not real:
        parts.append(np.imag(m[iu]))
    return np.concatenate(parts)


def _functional(a: np.ndarray, real: bool) -> np.ndarray:
    """Coefficients of ``x ↦ Re tr[A X(x)]``."""
    iu = _triu(a.shape[0])
    parts = [np.real(np.diag(a)), 2.0 * np.real(a[iu])]
    if not real:
        parts.append(2.0 * np.imag(a[iu]))
    return np.concatenate(parts)


def _decode(x: np.ndarray, d: int, real: bool) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    iu = _triu(d)
    k = len(iu[0])
    m[np.arange(d), np.arange(d)] = x[:d]
    up = x[d : d + k].astype(complex)
    if not real:
        up = up + 1j * x[d + k : d + 2 * k]
    m[iu] = up
    m[(iu[1], iu[0])] = np.conj(up)
    return m


def _embed(m: np.ndarray, real: bool) -> np.ndarray:
    if real:
        return np.real(m)
    re, im = np.real(m), np.imag(m)
    return np.block([[re, -im], [im, re]])


def _svec(s: np.ndarray) -> np.ndarray:
    n = s.shape[0]
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))  # column-major upper triangle
    rows, cols = rows[order], cols[order]
    w = np.where(rows == cols, 1.0, _SQRT2)
    return s[rows, cols] * w


def _smat(v: np.ndarray, n: int) -> np.ndarray:
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    w = np.where(rows == cols, 1.0, 1.0 / _SQRT2)
    m = np.zeros((n, n))
    m[rows, cols] = v * w
    m[cols, rows] = v * w
    return m


def _svec_index(n: int) -> np.ndarray:
    idx = np.full((n, n), -1, dtype=int)
    rows, cols = np.triu_indices(n)
    order = np.lexsort((rows, cols))
    idx[rows[order], cols[order]] = np.arange(len(rows))
    return idx


def _param_embedding_columns(d: int, real: bool):
    """Sparse (row, param, value) triples of ``svec(embed(F_p))``."""
    n = d if real else 2 * d
    idx = _svec_index(n)
    iu = _triu(d)
    k = len(iu[0])
    rows, cols, vals = [], [], []
    for i in range(d):
        rows.append(idx[i, i]); cols.append(i); vals.append(1.0)
        if not real:
            rows.append(idx[d + i, d + i]); cols.append(i); vals.append(1.0)
    for p, (i, j) in enumerate(zip(*iu)):
        rows.append(idx[i, j]); cols.append(d + p); vals.append(_SQRT2)
        if not real:
            rows.append(idx[d + i, d + j]); cols.append(d + p); vals.append(_SQRT2)
            rows.append(idx[i, d + j]); cols.append(d + k + p); vals.append(-_SQRT2)
            rows.append(idx[j, d + i]); cols.append(d + k + p); vals.append(_SQRT2)
    return np.array(rows), np.array(cols), np.array(vals), n * (n + 1) // 2


# -- problem -------------------------------------------------------------------


class SdpProblem:
    """Builder for a small dense semidefinite (or linear) program.

    Example:
        >>> prob = SdpProblem()
        >>> E = prob.matrix("E", 2, interval=True)
        >>> prob.minimize({E: np.diag([0.5, 0.5])})
        >>> prob.add_linear({E: -np.diag([0.0, 1.0])}, "<=", 0.1 - 1.0)
        >>> sol, cert = prob.solve()
    """

    def __init__(self, name: str = "sdp"):
        self.name = name
        self._vars: list[Var] = []
        self._linear: list[_Linear] = []
        self._matrix: list[_MatrixCon] = []
        self._objective: dict = {}
        self._obj_const = 0.0
        self._sign = 1.0

    # variables
    def matrix(self, name: str, dim: int, *, psd=False, interval=False, regularize=False) -> MatrixVar:
        if dim < 1 or dim > MAX_VAR_DIM:
            raise BadParameter(f"matrix variable dimension {dim} outside [1, {MAX_VAR_DIM}]")
        v = MatrixVar(name, dim, psd=psd or interval, interval=interval, regularize=regularize)
        self._vars.append(v)
        return v

    def scalar(self, name: str, lb: float | None = None, ub: float | None = None) -> ScalarVar:
        v = ScalarVar(name, lb, ub)
        self._vars.append(v)
        return v

    def scalars(self, name: str, n: int, lb: float | None = None, ub: float | None = None) -> list[ScalarVar]:
        return [self.scalar(f"{name}[{i}]", lb, ub) for i in range(n)]

    # constraints
    def add_linear(self, terms: dict, sense: str, rhs: float) -> None:
        if sense not in ("==", "<=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        self._linear.append(_Linear(dict(terms), sense, float(rhs)))

    def add_psd(self, terms: dict, const=None) -> None:
        self._matrix.append(self._matrix_con(terms, const, "psd"))

    def add_matrix_eq(self, terms: dict, const=None) -> None:
        self._matrix.append(self._matrix_con(terms, const, "eq"))

    def _matrix_con(self, terms, const, kind):
        dims = {v.dim for v in terms if isinstance(v, MatrixVar)}
        dims |= {np.shape(c)[0] for v, c in terms.items() if isinstance(v, ScalarVar)}
        if const is not None:
            dims.add(np.shape(const)[0])
        if len(dims) != 1:
            raise BadParameter(f"inconsistent dimensions in matrix constraint: {dims}")
        c = None if const is None else np.asarray(const, dtype=complex)
        return _MatrixCon(dict(terms), c, kind, dims.pop())

    def minimize(self, terms: dict, constant: float = 0.0) -> None:
        self._objective, self._obj_const, self._sign = dict(terms), float(constant), 1.0

    def maximize(self, terms: dict, constant: float = 0.0) -> None:
        self._objective, self._obj_const, self._sign = dict(terms), float(constant), -1.0

    # compilation
    def _is_real(self) -> bool:
        mats = []
        for con in self._linear:
            mats += [c for v, c in con.terms.items() if isinstance(v, MatrixVar)]
        for con in self._matrix:
            mats += [c for v, c in con.terms.items() if isinstance(v, ScalarVar)]
            if con.const is not None:
                mats.append(con.const)
        mats += [c for v, c in self._objective.items() if isinstance(v, MatrixVar)]
        return all(np.max(np.abs(np.imag(np.asarray(m, dtype=complex))), initial=0.0) == 0.0 for m in mats)

    def _layout(self, real: bool) -> int:
        n = 0
        for v in self._vars:
            v._offset = n
            if isinstance(v, MatrixVar):
                v._size = _n_params(v.dim, real)
                n += v._size
            else:
                n += 1
        return n

    def _scalar_row(self, terms: dict, n: int, real: bool) -> np.ndarray:
        row = np.zeros(n)
        for v, c in terms.items():
            if isinstance(v, MatrixVar):
                a = np.asarray(c, dtype=complex)
                if a.shape != (v.dim, v.dim):
                    raise BadParameter(f"coefficient shape {a.shape} does not match {v.name}")
                row[v._offset : v._offset + v._size] += _functional(a, real)
            else:
                row[v._offset] += float(c)
        return row

    def _compile(self, real: bool):
        n = self._layout(real)
        zero_rows, zero_b = [], []
        nn_rows, nn_b = [], []
        for con in self._linear:
            row = self._scalar_row(con.terms, n, real)
            if con.sense == "==":
                zero_rows.append(row); zero_b.append(con.rhs)
            elif con.sense == "<=":
                nn_rows.append(row); nn_b.append(con.rhs)
            else:
                nn_rows.append(-row); nn_b.append(-con.rhs)
        for v in self._vars:
            if isinstance(v, ScalarVar):
                if v.lb is not None:
                    row = np.zeros(n); row[v._offset] = -1.0
                    nn_rows.append(row); nn_b.append(-v.lb)
                if v.ub is not None:
                    row = np.zeros(n); row[v._offset] = 1.0
                    nn_rows.append(row); nn_b.append(v.ub)
        for con in self._matrix:
            if con.kind != "eq":
                continue
            m = _n_params(con.dim, real)
            block = np.zeros((m, n))
            for v, c in con.terms.items():
                if isinstance(v, MatrixVar):
                    block[:, v._offset : v._offset + v._size] += float(np.real(c)) * np.eye(m)
                else:
                    block[:, v._offset] += _coords(np.asarray(c, dtype=complex), real)
            rhs = -_coords(con.const, real) if con.const is not None else np.zeros(m)
            zero_rows.extend(block); zero_b.extend(rhs)

        a_zero = np.array(zero_rows).reshape(-1, n)
        b_zero = np.array(zero_b, dtype=float)
        a_zero, b_zero = _reduce_equalities(a_zero, b_zero)

        blocks = [sp.csr_matrix(a_zero), sp.csr_matrix(np.array(nn_rows).reshape(-1, n))]
        bvec = [b_zero, np.array(nn_b, dtype=float)]
        cones = []
        if len(b_zero):
            cones.append(clarabel.ZeroConeT(len(b_zero)))
        if len(nn_b):
            cones.append(clarabel.NonnegativeConeT(len(nn_b)))
        psd_blocks = []  # (terms, const, dim) of each PSD cone, for later residual checks

        def add_psd_block(terms, const, dim):
            er, ep, ev, size = _param_embedding_columns(dim, real)
            rr, cc, vv = [], [], []
            for v, c in terms.items():
                if isinstance(v, MatrixVar):
                    rr.append(er); cc.append(ep + v._offset); vv.append(-float(np.real(c)) * ev)
                else:
                    col = _svec(_embed(np.asarray(c, dtype=complex), real))
                    nz = np.flatnonzero(col)
                    rr.append(nz); cc.append(np.full(nz.size, v._offset)); vv.append(-col[nz])
            a = sp.coo_matrix(
                (np.concatenate(vv) if vv else [], (np.concatenate(rr) if rr else [], np.concatenate(cc) if cc else [])),
                shape=(size, n),
            )
            b = _svec(_embed(const, real)) if const is not None else np.zeros(size)
            blocks.append(sp.csr_matrix(a))
            bvec.append(b)
            cones.append(clarabel.PSDTriangleConeT(dim if real else 2 * dim))
            psd_blocks.append((terms, const, dim))

        for v in self._vars:
            if isinstance(v, MatrixVar) and v.psd:
                add_psd_block({v: 1.0}, None, v.dim)
                if v.interval:
                    add_psd_block({v: -1.0}, np.eye(v.dim), v.dim)
        for con in self._matrix:
            if con.kind == "psd":
                add_psd_block(con.terms, con.const, con.dim)

        a = sp.vstack(blocks).tocsc()
        b = np.concatenate(bvec)
        q = self._sign * self._scalar_row(self._objective, n, real)
        pdiag = np.zeros(n)
        for v in self._vars:
            if isinstance(v, MatrixVar) and v.regularize:
                d = v.dim
                w = np.concatenate([np.ones(d), 2 * np.ones(v._size - d)])
                pdiag[v._offset : v._offset + v._size] = 2 * TIE_BREAK_MU * w
        return n, sp.diags(pdiag).tocsc(), q, a, b, cones

    def _decode_all(self, x: np.ndarray, real: bool) -> dict:
        out = {}
        for v in self._vars:
            if isinstance(v, MatrixVar):
                out[v] = _decode(x[v._offset : v._offset + v._size], v.dim, real)
            else:
                out[v] = float(x[v._offset])
        return out

    def objective_value(self, values: Mapping) -> float:
        """User objective (without tie-breaking term) at a decoded point."""
        total = self._obj_const
        for v, c in self._objective.items():
            if isinstance(v, MatrixVar):
                total += float(np.real(np.trace(np.asarray(c) @ values[v])))
            else:
                total += float(c) * values[v]
        return total

    def residual(self, values: Mapping) -> float:
        """Largest constraint violation at a decoded point, evaluated in matrix form."""
        worst = 0.0
        for con in self._linear:
            lhs = 0.0
            for v, c in con.terms.items():
                if isinstance(v, MatrixVar):
                    lhs += float(np.real(np.trace(np.asarray(c) @ values[v])))
                else:
                    lhs += float(c) * values[v]
            diff = lhs - con.rhs
            if con.sense == "==":
                worst = max(worst, abs(diff))
            elif con.sense == "<=":
                worst = max(worst, diff)
            else:
                worst = max(worst, -diff)
        for v in self._vars:
            if isinstance(v, ScalarVar):
                if v.lb is not None:
                    worst = max(worst, v.lb - values[v])
                if v.ub is not None:
                    worst = max(worst, values[v] - v.ub)
            elif v.psd:
                ev = np.linalg.eigvalsh(values[v])
                worst = max(worst, -ev[0])
                if v.interval:
                    worst = max(worst, ev[-1] - 1.0)
        for con in self._matrix:
            y = np.zeros((con.dim, con.dim), dtype=complex) if con.const is None else con.const.copy()
            for v, c in con.terms.items():
                y = y + (float(np.real(c)) * values[v] if isinstance(v, MatrixVar) else values[v] * np.asarray(c))
            if con.kind == "eq":
                worst = max(worst, float(np.max(np.abs(y))))
            else:
                worst = max(worst, -float(np.linalg.eigvalsh(0.5 * (y + y.conj().T))[0]))
        return max(worst, 0.0)

    def _certify(self, raw: SolveCertificate, values: dict) -> tuple[SolveCertificate, dict]:
        resid = float(self.residual(values))
        primal = self._sign * raw.primal_value + self._obj_const
        dual = self._sign * raw.dual_value + self._obj_const
        gap = abs(primal - dual) / max(1.0, abs(primal), abs(dual))
        ok = gap <= TOL_GAP and resid <= TOL_FEAS
        cert = SolveCertificate(
            status=Status.OPTIMAL if ok else Status.MAX_ITER,
            primal_value=primal,
            dual_value=dual,
            gap=gap,
            residual=resid,
            iterations=raw.iterations,
            dual_residual=raw.dual_residual,
            solver_status=raw.solver_status,
        )
        return cert, values

    def solve(self, *, tol: float | None = None, max_iter: int = 200) -> tuple[Solution | None, SolveCertificate]:
        """Solve and certify.

        Returns the decoded point (``None`` unless ``Optimal``) and the
        certificate.  ``Infeasible`` and ``Unbounded`` are returned, not
        raised.

        Raises:
            IllConditioned: the interior-point iteration broke down numerically.
            MaxIter: iteration limit hit, or the returned point could not be
                certified at the required gap/feasibility tolerances.
        """
        real = self._is_real()
        n, p, q, a, b, cones = self._compile(real)
        tol = ipm_tolerance() if tol is None else tol
        solved = None
        for extra in RETRY_SETTINGS:
            raw, x = _run_clarabel(p, q, a, b, cones, tol, max_iter, extra)
            if raw.solver_status not in ("Solved", "AlmostSolved"):
                if solved is None:
                    cert = raw
                break
            values = self._decode_all(x, real)
            solved = self._certify(raw, values)
            if solved[0].status is Status.OPTIMAL:
                break
        if solved is not None:
            cert, values = solved
            log_certificate(cert)
            if cert.status is not Status.OPTIMAL:
                raise MaxIter(
                    f"{self.name}: solution not certified (gap {cert.gap:.3g}, residual {cert.residual:.3g})",
                    cert,
                )
            return Solution(values), cert
        log_certificate(cert)
        if cert.status in (Status.INFEASIBLE, Status.UNBOUNDED):
            return None, cert
        if cert.solver_status in ("NumericalError", "InsufficientProgress"):
            raise IllConditioned(f"{self.name}: {cert.solver_status}", cert)
        raise MaxIter(f"{self.name}: {cert.solver_status}", cert)


def _reduce_equalities(a: np.ndarray, b: np.ndarray):
    """Drop linearly dependent equality rows when the system is consistent."""
    if a.shape[0] <= 1:
        return a, b
    _, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return a[:0], b[:0]
    rank = int(np.sum(diag > 1e-11 * diag[0]))
    if rank == a.shape[0]:
        return a, b
    keep = np.sort(piv[:rank])
    sol, *_ = np.linalg.lstsq(a[keep], b[keep], rcond=None)
    # inconsistent: keep every row so the solver can certify infeasibility
    if np.max(np.abs(a @ sol - b)) > 1e-9 * max(1.0, np.max(np.abs(b))):
        return a, b
    return a[keep], b[keep]


def _dual_cone_violation(z: np.ndarray, cones) -> float:
    worst, k = 0.0, 0
    for cone in cones:
        if isinstance(cone, clarabel.ZeroConeT):
            k += cone.dim
        elif isinstance(cone, clarabel.NonnegativeConeT):
            seg = z[k : k + cone.dim]
            worst = max(worst, float(-seg.min(initial=0.0)))
            k += cone.dim
        else:
            n = cone.dim
            size = n * (n + 1) // 2
            worst = max(worst, float(-np.linalg.eigvalsh(_smat(z[k : k + size], n))[0]))
            k += size
    return max(worst, 0.0)


def _cone_dims(cones):
    out = []
    for cone in cones:
        out.append(cone.dim if not isinstance(cone, clarabel.PSDTriangleConeT) else cone.dim * (cone.dim + 1) // 2)
    return out


def _run_clarabel(p, q, a, b, cones, tol, max_iter, extra=None):
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = max_iter
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol
    settings.tol_ktratio = 1e-8
    settings.presolve_enable = False
    for key, value in (extra or {}).items():
        setattr(settings, key, value)
    solver = clarabel.DefaultSolver(p, q, a, b, cones, settings)
    sol = solver.solve()
    status = str(sol.status)
    x = np.asarray(sol.x, dtype=float)
    z = np.asarray(sol.z, dtype=float)
    if status in ("Solved", "AlmostSolved"):
        quad = float(x @ (p @ x))
        primal = 0.5 * quad + float(q @ x)
        dual = -0.5 * quad - float(b @ z)
        dres = float(np.max(np.abs(p @ x + q + a.T @ z), initial=0.0))
        dres = max(dres, _dual_cone_violation(z, cones))
        cert = SolveCertificate(Status.OPTIMAL, primal, dual, abs(primal - dual), float("nan"),
                                int(sol.iterations), dual_residual=dres, solver_status=status)
        return cert, x
    if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        nz = np.linalg.norm(z)
        zn = z / nz if nz > 0 else z
        margin = float(-(b @ zn))
        ray_res = float(np.max(np.abs(a.T @ zn), initial=0.0))
        cone_res = _dual_cone_violation(zn, cones)
        ok = margin >= INFEAS_MARGIN and ray_res <= 1e-3 * margin and cone_res <= 1e-3 * margin
        cert = SolveCertificate(Status.INFEASIBLE if ok else Status.MAX_ITER, float("inf"), float("inf"),
                                float("nan"), float("nan"), int(sol.iterations),
                                dual_residual=max(ray_res, cone_res), infeasibility_margin=margin,
                                solver_status=status)
        return cert, x
    if status in ("DualInfeasible", "AlmostDualInfeasible"):
        cert = SolveCertificate(Status.UNBOUNDED, float("-inf"), float("-inf"), float("nan"), float("nan"),
                                int(sol.iterations), solver_status=status)
        return cert, x
    cert = SolveCertificate(Status.MAX_ITER, float("nan"), float("nan"), float("nan"), float("nan"),
                            int(sol.iterations), solver_status=status)
    return cert, x


def solve_sdp(problem: SdpProblem, **kwargs) -> tuple[Solution | None, SolveCertificate]:
    return problem.solve(**kwargs)


def solve_lp(
    c: Sequence[float],
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    bounds=(0.0, None),
    *,
    maximize: bool = False,
) -> tuple[np.ndarray | None, SolveCertificate]:
    """Linear program through the same certified engine.

    Minimizes (or maximizes) ``c @ x`` subject to ``A_eq x = b_eq``,
    ``A_ub x <= b_ub`` and per-variable ``bounds``.  ``bounds`` is a single
    ``(lo, hi)`` pair applied to every variable or a list of pairs; ``None``
    means unbounded, as in :func:`scipy.optimize.linprog`.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if n > 10000:
        raise BadParameter("LP has more than 10000 variables")
    if bounds is None:
        bounds = (None, None)
    if len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        bounds = [tuple(bounds)] * n
    if len(bounds) != n:
        raise BadParameter("bounds length does not match the number of variables")
    prob = SdpProblem("lp")
    xs = [prob.scalar(f"x[{i}]", lo, hi) for i, (lo, hi) in enumerate(bounds)]

    def rows(mat, rhs, sense):
        if mat is None:
            return
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        if mat.shape != (rhs.size, n):
            raise BadParameter(f"constraint matrix shape {mat.shape} incompatible with {rhs.size} rows, {n} vars")
        for r, bi in zip(mat, rhs):
            prob.add_linear({xs[j]: r[j] for j in np.flatnonzero(r)}, sense, bi)

    rows(A_eq, b_eq, "==")
    rows(A_ub, b_ub, "<=")
    obj = {xs[j]: c[j] for j in range(n)}
    (prob.maximize if maximize else prob.minimize)(obj)
    sol, cert = prob.solve()
    if sol is None:
        return None, cert
    return np.array([sol[x] for x in xs]), cert

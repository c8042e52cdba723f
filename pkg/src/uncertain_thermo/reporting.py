"""Job configs in, certified JSON and CSV reports out.

A job is one JSON object validated by :class:`JobConfig`.  Reports are
deterministic for a fixed config: keys are sorted, there are no timestamps,
and the config's SHA-256 and the library version are embedded next to every
solver certificate and grid description produced while running the job.
"""

from __future__ import annotations

import concurrent.futures
import contextlib
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .asymptotics import CSV_COLUMNS, exponent_and_rates, irreversibility_example, optimal_error_at_rate
from .config import use_tolerance
from .divergences import (
    DEFAULT_M_CAP,
    d_max,
    d_max_pair,
    d_max_segment,
    d_min,
    d_min_constrained,
    hoeffding,
    umegaki,
    zero_error_threshold,
)
from .errors import (
    BackendUnavailable,
    BadParameter,
    OperatorError,
    SchemaError,
    SolverFailure,
    UncertainThermoError,
    VerificationFailed,
)
from .gibbs import battery_gibbs, gibbs_from_hamiltonian, qubit_field_gibbs
from .operators import format_matrix, make_density, parse_matrix
from .sets import StateSet, materialize
from .solver import TOL_FEAS, TOL_GAP, SolveCertificate, Status, log_certificate, record_certificates
from .tasks import (
    DEFAULT_M0,
    dirty_truncation_nogo,
    extractable_work,
    formation_cost,
    formation_lower_bound,
    nogo_purification,
    truncation,
)

REPORT_SCHEMA = "uncertain_thermo.report/1"

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_SOLVER = 3
EXIT_VERIFICATION = 4

Command = Literal[
    "gibbs", "divergence", "extract", "form", "nogo", "truncate",
    "example-irreversibility", "error-at-rate", "sweep",
]
Quantity = Literal[
    "d_min", "d_min_constrained", "d_max", "d_max_pair", "d_max_segment",
    "umegaki", "hoeffding", "zero_error_threshold",
]
SWEEPABLE = ("eps", "n", "r", "delta", "m_cap", "grid", "M", "N", "beta")

_STRICT = ConfigDict(extra="forbid")


# -- schema --------------------------------------------------------------------


def _matrix(v: Any) -> list:
    if v is None:
        return v
    try:
        parse_matrix(v)
    except ValueError as exc:
        raise ValueError(str(exc)) from None
    return v


class SamplerModel(BaseModel):
    model_config = _STRICT
    family: str
    params: dict[str, Any] = Field(default_factory=dict)
    grid: int = 9


class SetModel(BaseModel):
    model_config = _STRICT
    generators: list[list[Any]] = Field(default_factory=list)
    hull: Literal["finite", "convex", "affine"] = "finite"
    sampler: SamplerModel | None = None

    @field_validator("generators")
    @classmethod
    def _check(cls, v):
        for m in v:
            _matrix(m)
        return v

    @model_validator(mode="after")
    def _nonempty(self):
        if not self.generators and self.sampler is None:
            raise ValueError("a state set needs generators or a sampler")
        return self


class Params(BaseModel):
    model_config = _STRICT
    eps: float = Field(0.0, ge=0.0, lt=1.0)
    battery: Literal["clean", "dirty"] = "clean"
    m_cap: float = Field(DEFAULT_M_CAP, gt=1.0)
    m0: float = Field(DEFAULT_M0, gt=1.0)
    grid: int | None = Field(None, ge=2)
    n: int | None = Field(None, ge=1)
    r: float | None = Field(None, ge=0.0)
    delta: float | None = Field(None, gt=0.0)
    M: float | None = None
    M2: float | None = None
    N: float | None = None
    beta: float = Field(1.0, gt=0.0)
    field_h: list[float] | None = None
    quantity: Quantity | None = None
    n_list: list[int] | None = None


class RangeModel(BaseModel):
    model_config = _STRICT
    start: float
    stop: float
    step: float = Field(gt=0.0)

    def values(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 12) for i in range(max(count, 0))]


class SweepModel(BaseModel):
    model_config = _STRICT
    command: Command
    parameter: str
    values: list[float] | None = None
    range: RangeModel | None = None

    @model_validator(mode="after")
    def _one_range(self):
        if self.command == "sweep":
            raise ValueError("sweeps cannot be nested")
        if self.parameter not in SWEEPABLE:
            raise ValueError(f"parameter {self.parameter!r} cannot be swept; choose from {list(SWEEPABLE)}")
        if (self.values is None) == (self.range is None):
            raise ValueError("give exactly one of 'values' or 'range'")
        if not self.points():
            raise ValueError("the sweep range is empty")
        return self

    def points(self) -> list[float]:
        return list(self.values) if self.values is not None else self.range.values()


class JobConfig(BaseModel):
    """A single job.  Matrices are nested lists of ``[re, im]`` pairs."""

    model_config = _STRICT
    command: Command
    p: SetModel | None = None
    e: SetModel | None = None
    k: SetModel | None = None
    rho: list[list[Any]] | None = None
    tau: list[list[Any]] | None = None
    target_rho: list[list[Any]] | None = None
    target_tau: list[list[Any]] | None = None
    hamiltonian: list[list[Any]] | None = None
    params: Params = Field(default_factory=Params)
    sweep: SweepModel | None = None
    output: str | None = None
    seed: int = 0

    @field_validator("rho", "tau", "target_rho", "target_tau", "hamiltonian")
    @classmethod
    def _check(cls, v):
        return _matrix(v)

    @model_validator(mode="after")
    def _sweep_present(self):
        if (self.command == "sweep") != (self.sweep is not None):
            raise ValueError("'sweep' must be given exactly when command is 'sweep'")
        return self

    def canonical(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)

    def sha256(self) -> str:
        return hashlib.sha256(_dumps(self.canonical()).encode()).hexdigest()


def load_config(data: dict | str | Path, **overrides: Any) -> JobConfig:
    """Validate a config (dict, JSON text or path).

    ``overrides`` replace entries of ``params`` (``None`` values are ignored).

    Raises:
        SchemaError: on malformed JSON, unknown fields or invalid values.
    """
    if isinstance(data, Path):
        try:
            data = data.read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read config: {exc}") from exc
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    extra = {k: v for k, v in overrides.items() if v is not None}
    if extra:
        data = {**data, "params": {**data.get("params", {}), **extra}}
    try:
        return JobConfig.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(_format_validation(exc)) from None


def _format_validation(exc: ValidationError) -> str:
    parts = [f"{'.'.join(str(x) for x in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()]
    return "invalid config: " + "; ".join(parts)


# -- serialization -------------------------------------------------------------


def _json_safe(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, np.ndarray):
        return _json_safe(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _json_safe(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def _dumps(obj: Any) -> str:
    return json.dumps(_json_safe(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _certification(certs: list[SolveCertificate]) -> dict:
    optimal = [c for c in certs if c.status is Status.OPTIMAL]
    return {
        "solves": len(certs),
        "optimal": len(optimal),
        "max_gap": max((c.gap for c in optimal), default=0.0),
        "max_residual": max((c.residual for c in optimal), default=0.0),
        "gap_tol": TOL_GAP,
        "residual_tol": TOL_FEAS,
        "all_optimal_certified": all(c.gap <= TOL_GAP and c.residual <= TOL_FEAS for c in optimal),
    }


@dataclass
class Report:
    """A finished job: JSON-ready payload plus the process exit code."""

    payload: dict
    exit_code: int
    csv: str | None = None

    def to_json(self) -> str:
        return _dumps(self.payload)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        if self.csv is not None:
            path.write_text(self.csv)
            side = path.with_suffix(".json") if path.suffix != ".json" else path.with_suffix(".report.json")
            side.write_text(self.to_json())
        else:
            path.write_text(self.to_json())
        return path


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, VerificationFailed):
        return EXIT_VERIFICATION
    if isinstance(exc, (SolverFailure, BackendUnavailable)):
        return EXIT_SOLVER
    if isinstance(exc, (SchemaError, BadParameter, OperatorError)):
        return EXIT_SCHEMA
    return EXIT_SOLVER


def _error_payload(exc: BaseException, context: dict) -> dict:
    out = {"type": type(exc).__name__, "message": str(exc), "context": context}
    cert = getattr(exc, "certificate", None)
    if cert is not None:
        out["certificate"] = cert.to_dict()
    report = getattr(exc, "report", None)
    if report is not None:
        out["verification"] = report.to_dict() if hasattr(report, "to_dict") else report
    return out


# -- commands ------------------------------------------------------------------


@dataclass
class _Inputs:
    cfg: JobConfig
    grids: list = field(default_factory=list)

    def set(self, name: str, required: bool = True) -> StateSet | None:
        model = getattr(self.cfg, name)
        if model is None:
            if required:
                raise SchemaError(f"command {self.cfg.command!r} needs the state set {name!r}")
            return None
        data = model.model_dump(exclude_none=True)
        if self.cfg.params.grid is not None and "sampler" in data:
            data["sampler"]["grid"] = self.cfg.params.grid
        s = materialize(StateSet.from_dict(data))
        meta = s.grid_metadata()
        if meta is not None:
            self.grids.append({"set": name, **meta})
        return s

    def matrix(self, name: str, required: bool = True):
        v = getattr(self.cfg, name)
        if v is None:
            if required:
                raise SchemaError(f"command {self.cfg.command!r} needs the matrix {name!r}")
            return None
        return parse_matrix(v)

    def need(self, *names: str) -> list:
        vals = [getattr(self.cfg.params, n) for n in names]
        missing = [n for n, v in zip(names, vals) if v is None]
        if missing:
            raise SchemaError(f"command {self.cfg.command!r} needs params {missing}")
        return vals


def _cmd_gibbs(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    if inp.cfg.hamiltonian is not None:
        state = gibbs_from_hamiltonian(inp.matrix("hamiltonian"), pr.beta)
        source = "hamiltonian"
    elif pr.field_h is not None:
        state = qubit_field_gibbs(pr.field_h, pr.beta)
        source = "qubit_field"
    elif pr.M is not None:
        state = battery_gibbs(pr.M)
        source = "battery"
    else:
        raise SchemaError("gibbs needs 'hamiltonian', params.field_h or params.M")
    return {"state": format_matrix(state.matrix), "source": source, "beta": pr.beta, "provenance": "closed-form"}


def _cmd_divergence(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    q = pr.quantity
    if q is None:
        raise SchemaError("divergence needs params.quantity")
    if q in ("umegaki", "hoeffding", "zero_error_threshold", "d_max_pair"):
        rho, tau = make_density(inp.matrix("rho")).matrix, make_density(inp.matrix("tau")).matrix
        if q == "d_max_pair":
            return d_max_pair(rho, tau, pr.eps).to_dict()
        if q == "umegaki":
            val = umegaki(rho, tau)
        elif q == "zero_error_threshold":
            val = zero_error_threshold(rho, tau)
        else:
            n, r = inp.need("n", "r")
            val = hoeffding(rho, tau, n, r)
        return {"quantity": q, "value_bits": val if math.isfinite(val) else None,
                "status": "finite" if math.isfinite(val) else "infinite", "provenance": "closed-form"}
    p, e = inp.set("p"), inp.set("e")
    if q == "d_min":
        return d_min(p, e, pr.eps).to_dict()
    if q == "d_min_constrained":
        return d_min_constrained(p, e, inp.set("k"), pr.eps).to_dict()
    if q == "d_max":
        return d_max(p, e, pr.eps).to_dict()
    return d_max_segment(p, e, pr.eps, m_cap=pr.m_cap).to_dict()


def _cmd_extract(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    return extractable_work(inp.set("p"), inp.set("e"), pr.eps, pr.battery, m0=pr.m0).to_dict()


def _cmd_form(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    p, e = inp.set("p"), inp.set("e")
    out = formation_cost(p, e, pr.eps, pr.battery, m_cap=pr.m_cap).to_dict()
    if pr.battery == "dirty":
        out["lower_bound"] = formation_lower_bound(p, e, pr.eps).to_dict()
    return out


def _cmd_nogo(inp: _Inputs) -> dict:
    return nogo_purification(inp.set("p"), inp.set("e"), inp.matrix("target_rho"), inp.matrix("target_tau"),
                             inp.cfg.params.eps).to_dict()


def _cmd_truncate(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    m, n = inp.need("M", "N")
    if pr.M2 is not None:
        return dirty_truncation_nogo(m, pr.M2, n, pr.eps).to_dict()
    return truncation(m, n, pr.eps).to_dict()


def _cmd_irreversibility(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    n, delta = inp.need("n", "delta")
    row = irreversibility_example(n, pr.eps, delta, grid=pr.grid or 9, m_cap=pr.m_cap)
    inp.grids.append({"set": "e", "family": "iid_power", "params": {"base": "battery_interval", "M_lo": 2.0,
                                                                  "M_hi": 2.0 + delta, "n": n},
                      "grid": row.grid})
    return row.to_dict()


def _cmd_error_at_rate(inp: _Inputs) -> dict:
    pr = inp.cfg.params
    out: dict[str, Any] = {}
    if inp.cfg.p is not None or inp.cfg.e is not None:
        n, r = inp.need("n", "r")
        out["error_at_rate"] = optimal_error_at_rate(inp.set("p"), inp.set("e"), n, r).to_dict()
    if pr.n_list is not None:
        (r,) = inp.need("r")
        rho = inp.matrix("rho", required=False)
        tau = inp.matrix("tau", required=False)
        if rho is None or tau is None:
            raise SchemaError("exponent tables need 'rho' and 'tau'")
        out["exponents"] = exponent_and_rates(rho, tau, r, pr.n_list).to_dict()
    if not out:
        raise SchemaError("error-at-rate needs sets p, e (with n, r) or rho, tau with params.n_list")
    return out


_COMMANDS = {
    "gibbs": _cmd_gibbs,
    "divergence": _cmd_divergence,
    "extract": _cmd_extract,
    "form": _cmd_form,
    "nogo": _cmd_nogo,
    "truncate": _cmd_truncate,
    "example-irreversibility": _cmd_irreversibility,
    "error-at-rate": _cmd_error_at_rate,
}


def _header(cfg: JobConfig) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "library_version": __version__,
        "command": cfg.command,
        "config": cfg.canonical(),
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
    }


def _execute(cfg: JobConfig) -> tuple[dict | None, dict | None, int, list, list]:
    inp = _Inputs(cfg)
    with record_certificates() as log:
        try:
            result = _COMMANDS[cfg.command](inp)
            err, code = None, EXIT_OK
        except UncertainThermoError as exc:
            result, err, code = None, _error_payload(exc, {"command": cfg.command, "params": cfg.params.model_dump(
                mode="json", exclude_none=True)}), _exit_code(exc)
    return result, err, code, list(log), inp.grids


def run_job(config: JobConfig | dict | str | Path, tol: float | str | None = None) -> Report:
    """Run one (non-sweep) job and build its report.

    Computation errors are serialized into the report with their context
    and mapped to the exit code; only schema errors raise.

    Raises:
        SchemaError: the config is invalid.
    """
    cfg = config if isinstance(config, JobConfig) else load_config(config)
    if cfg.command == "sweep":
        return run_sweep(cfg, tol=tol)
    with _maybe_tol(tol):
        result, err, code, certs, grids = _execute(cfg)
    payload = {
        **_header(cfg),
        "status": "ok" if err is None else "error",
        "exit_code": code,
        "result": result,
        "error": err,
        "certificates": [c.to_dict() for c in certs],
        "certification": _certification(certs),
        "grids": grids,
    }
    return Report(payload, code)


def _maybe_tol(tol: float | str | None):
    return contextlib.nullcontext() if tol is None else use_tolerance(tol)


# -- sweeps --------------------------------------------------------------------


def _row_config(cfg: JobConfig, value: float) -> JobConfig:
    sw = cfg.sweep
    data = cfg.canonical()
    data.pop("sweep")
    data["command"] = sw.command
    v: Any = value
    if sw.parameter in ("n", "grid"):
        if float(value) != int(value):
            raise SchemaError(f"parameter {sw.parameter!r} must be an integer, got {value}")
        v = int(value)
    data["params"] = {**data.get("params", {}), sw.parameter: v}
    return load_config(data)


def _sweep_row(args: tuple) -> tuple[float, dict | None, dict | None, list, list]:
    data, value, tol = args
    cfg = JobConfig.model_validate(data)
    try:
        row_cfg = _row_config(cfg, value)
    except SchemaError as exc:
        return value, None, {"type": "SchemaError", "message": str(exc)}, [], []
    with _maybe_tol(tol):
        result, err, _, certs, grids = _execute(row_cfg)
    return value, result, err, [c.to_dict() for c in certs], grids


def _generic_row(param: str, value: float, result: dict | None, err: dict | None) -> dict:
    row = {param: _cell(value), "value": "", "status": "", "verdict": "", "provenance": "", "error": ""}
    if err is not None:
        row["error"] = f"{err['type']}: {err['message']}"
        return row
    val = result.get("value_bits", result.get("alpha"))
    if "error_at_rate" in result:
        val = result["error_at_rate"]["alpha"]
    row["value"] = "" if val is None else f"{val:.12g}"
    row["status"] = result.get("status", result.get("value_status", "finite"))
    row["verdict"] = result.get("verdict", "")
    row["provenance"] = result.get("provenance", "solver" if result.get("certificates") else "closed-form")
    return row


def run_sweep(config: JobConfig | dict | str | Path, jobs: int = 1, tol: float | str | None = None) -> Report:
    """Run a job once per value of its single ranged parameter.

    Irreversibility sweeps use the columns ``n, eps, delta, grid, W, C,
    Wbar, Cbar_status, closed_form_deltas``; other sweeps use
    ``<parameter>, value, status, verdict, provenance``.  Failing rows are
    recorded in an ``error`` column and the sweep continues.

    Raises:
        SchemaError: the config is invalid or not a sweep.
    """
    cfg = config if isinstance(config, JobConfig) else load_config(config)
    if cfg.sweep is None:
        raise SchemaError("run_sweep needs a config with command 'sweep'")
    sw = cfg.sweep
    values = sw.points()
    data = cfg.model_dump(mode="json")
    tasks = [(data, v, tol) for v in values]
    if jobs > 1 and len(values) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_row, tasks))
        for *_, row_certs, _ in outcomes:
            for c in row_certs:
                log_certificate(_cert_from_dict(c))
    else:
        outcomes = [_sweep_row(t) for t in tasks]

    certs, grids, rows_json = [], [], []
    for value, result, err, c, g in outcomes:
        certs.extend(c)
        grids.extend(g)
        rows_json.append({"value": value, "result": result, "error": err})

    if sw.command == "example-irreversibility":
        text = _irreversibility_csv(cfg, outcomes)
    else:
        buf = io.StringIO()
        cols = (sw.parameter, "value", "status", "verdict", "provenance", "error")
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for value, result, err, _, _ in outcomes:
            w.writerow(_generic_row(sw.parameter, value, result, err))
        text = buf.getvalue()

    failed = sum(1 for r in rows_json if r["error"] is not None)
    payload = {
        **_header(cfg),
        "status": "ok" if failed == 0 else "partial",
        "exit_code": EXIT_OK,
        "rows": rows_json,
        "failed_rows": failed,
        "certificates": certs,
        "certification": _certification([_cert_from_dict(c) for c in certs]),
        "grids": grids,
    }
    return Report(payload, EXIT_OK, csv=text)


def _cert_from_dict(d: dict) -> SolveCertificate:
    return SolveCertificate(
        status=Status(d["status"]),
        primal_value=_num(d.get("primal_value")),
        dual_value=_num(d.get("dual_value")),
        gap=_num(d.get("gap")),
        residual=_num(d.get("residual")),
        iterations=int(d.get("iterations", 0)),
        dual_residual=_num(d.get("dual_residual")),
        infeasibility_margin=_num(d.get("infeasibility_margin")),
        solver_status=str(d.get("solver_status", "")),
    )


def _num(x: Any) -> float:
    return math.nan if x is None else float(x)


def _cell(value: float) -> float | int:
    return int(value) if float(value).is_integer() else value


def _irreversibility_csv(cfg: JobConfig, outcomes: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + ("error",), lineterminator="\n")
    w.writeheader()
    for value, result, err, _, _ in outcomes:
        if err is not None:
            base = {**cfg.params.model_dump(), cfg.sweep.parameter: _cell(value)}
            row = {k: base.get(k, "") if base.get(k) is not None else "" for k in CSV_COLUMNS}
            row["error"] = f"{err['type']}: {err['message']}"
            w.writerow(row)
            continue
        w.writerow({**_csv_from_row_dict(result), "error": ""})
    return buf.getvalue()


def _csv_from_row_dict(r: dict) -> dict:
    def fmt(entry: dict) -> str:
        v = entry["value"]
        return "inf" if v is None else f"{v:.12g}"

    deltas = ";".join(
        f"{k}={r[k]['discrepancy']:.3e}" for k in ("W", "C", "Wbar", "Cbar") if r[k].get("discrepancy") is not None
    )
    return {
        "n": r["n"],
        "eps": r["eps"],
        "delta": r["delta"],
        "grid": r["grid"],
        "W": fmt(r["W"]),
        "C": fmt(r["C"]),
        "Wbar": fmt(r["Wbar"]),
        "Cbar_status": r["Cbar_status"],
        "closed_form_deltas": deltas,
    }

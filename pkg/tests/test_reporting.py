import csv
import io
import json
import math

import numpy as np
import pytest

from uncertain_thermo import tasks
from uncertain_thermo.channels import VerificationReport
from uncertain_thermo.cli import main
from uncertain_thermo.errors import SchemaError
from uncertain_thermo.gibbs import battery_gibbs
from uncertain_thermo.operators import format_matrix, projector
from uncertain_thermo.reporting import load_config, run_job, run_sweep

K1 = format_matrix(projector(1, 2).matrix)
PI2, PI3 = format_matrix(battery_gibbs(2).matrix), format_matrix(battery_gibbs(3).matrix)


def extract_cfg(**params):
    return {"command": "extract", "p": {"generators": [K1]}, "e": {"generators": [PI2, PI3]},
            "params": {"eps": 0.1, **params}}


def write(tmp_path, cfg, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_unknown_field(self):
        with pytest.raises(SchemaError, match="epsilon"):
            load_config({**extract_cfg(), "epsilon": 0.1})

    def test_unknown_param(self):
        with pytest.raises(SchemaError):
            load_config(extract_cfg(epsilon=0.2))

    @pytest.mark.parametrize("eps", [-0.1, 1.0])
    def test_eps_bounds(self, eps):
        with pytest.raises(SchemaError):
            load_config(extract_cfg(eps=eps))

    def test_non_square(self):
        cfg = extract_cfg()
        cfg["p"]["generators"] = [[[[1, 0], [0, 0]], [[0, 0]]]]
        with pytest.raises(SchemaError):
            load_config(cfg)

    def test_empty_range(self):
        cfg = {"command": "sweep", "params": {"quantity": "d_min"},
               "sweep": {"command": "divergence", "parameter": "eps", "range": {"start": 0.5, "stop": 0.4, "step": 0.1}}}
        with pytest.raises(SchemaError, match="empty"):
            load_config(cfg)

    def test_bad_json(self):
        with pytest.raises(SchemaError):
            load_config("{not json")

    def test_sha_stable_and_sensitive(self):
        a, b = load_config(extract_cfg()), load_config(json.dumps(extract_cfg()))
        assert a.sha256() == b.sha256()
        assert load_config(extract_cfg(eps=0.2)).sha256() != a.sha256()

    def test_overrides(self):
        assert load_config(extract_cfg(), m_cap=50.0, grid=None).params.m_cap == 50.0


class TestReports:
    def test_extract(self):
        rep = run_job(extract_cfg())
        assert rep.exit_code == 0
        assert rep.payload["result"]["value_bits"] == pytest.approx(-math.log2(0.9), abs=1e-7)
        assert rep.payload["certification"]["all_optimal_certified"]
        assert rep.payload["library_version"] and len(rep.payload["config_sha256"]) == 64

    def test_deterministic(self):
        assert run_job(extract_cfg()).to_json() == run_job(extract_cfg()).to_json()

    def test_infinite_is_string_or_null(self):
        cfg = {"command": "divergence", "p": {"generators": [K1]}, "e": {"generators": [PI2]},
               "params": {"eps": 0.1, "quantity": "d_max_segment"}}
        text = run_job(cfg).to_json()
        assert "Infinity" not in text and "NaN" not in text
        json.loads(text)

    def test_truncate(self):
        res = run_job({"command": "truncate", "params": {"M": 2, "N": 2, "eps": 0.1}}).payload["result"]
        assert res["feasible"] and res["q"] == pytest.approx(0.1)

    def test_backend_unavailable_exit_3(self):
        cfg = {"command": "form", "p": {"generators": [K1]}, "e": {"generators": [PI2, PI3], "hull": "affine"},
               "params": {"eps": 0.1, "battery": "dirty"}}
        rep = run_job(cfg)
        assert rep.exit_code == 3 and rep.payload["error"]["type"] == "BackendUnavailable"

    def test_verification_failure_exit_4(self, monkeypatch):
        def broken(*args, **kwargs):
            return VerificationReport((1.0,), (1.0,), 1e-7, 0.1, False)

        monkeypatch.setattr(tasks, "verify_channel", broken)
        rep = run_job(extract_cfg())
        assert rep.exit_code == 4
        assert rep.payload["error"]["type"] == "VerificationFailed"
        assert rep.payload["error"]["context"]["command"] == "extract"

    def test_bad_parameter_exit_2(self):
        rep = run_job({"command": "truncate", "params": {"M": 1, "N": 2, "eps": 0.1}})
        assert rep.exit_code == 2


class TestSweeps:
    def test_irreversibility_rows(self):
        cfg = {"command": "sweep", "params": {"eps": 0.1, "delta": 0.5},
               "sweep": {"command": "example-irreversibility", "parameter": "n", "values": [1, 2, 5]}}
        rep = run_sweep(cfg)
        rows = list(csv.DictReader(io.StringIO(rep.csv)))
        assert [r["n"] for r in rows] == ["1", "2", "5"]
        assert rows[1]["Cbar_status"].startswith("InfeasibleUpToCap")
        assert rows[2]["error"].startswith("BadParameter")
        assert rep.payload["failed_rows"] == 1 and rep.payload["status"] == "partial"

    def test_eps_range_monotone(self):
        cfg = {"command": "sweep", "p": {"generators": [K1]}, "e": {"generators": [PI2, PI3]},
               "params": {"quantity": "d_min"},
               "sweep": {"command": "divergence", "parameter": "eps", "range": {"start": 0, "stop": 0.4, "step": 0.1}}}
        rows = list(csv.DictReader(io.StringIO(run_sweep(cfg).csv)))
        vals = [float(r["value"]) for r in rows]
        assert len(vals) == 5 and vals[0] == pytest.approx(1.0, abs=1e-7)
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_parallel_matches_serial(self):
        cfg = {"command": "sweep", "params": {"eps": 0.1, "delta": 0.1},
               "sweep": {"command": "example-irreversibility", "parameter": "n", "values": [1, 2]}}
        assert run_sweep(cfg, jobs=2).csv == run_sweep(cfg).csv


class TestCli:
    def test_success(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["--config", str(write(tmp_path, extract_cfg())), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["result"]["verdict"] == "Pass"

    def test_stdout(self, tmp_path, capsys):
        assert main(["--config", str(write(tmp_path, extract_cfg()))]) == 0
        assert json.loads(capsys.readouterr().out)["exit_code"] == 0

    def test_schema_exit_2(self, tmp_path, capsys):
        assert main(["--config", str(write(tmp_path, {**extract_cfg(), "bogus": 1}))]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["--config", str(tmp_path / "nope.json")]) == 2

    def test_solver_exit_3(self, tmp_path):
        cfg = {"command": "form", "p": {"generators": [K1]}, "e": {"generators": [PI2, PI3], "hull": "affine"},
               "params": {"eps": 0.1, "battery": "dirty"}}
        assert main(["--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "r.json")]) == 3

    def test_verification_exit_4(self, tmp_path, monkeypatch):
        monkeypatch.setattr(tasks, "verify_channel",
                            lambda *a, **k: VerificationReport((1.0,), (1.0,), 1e-7, 0.1, False))
        assert main(["--config", str(write(tmp_path, extract_cfg())), "--out", str(tmp_path / "r.json")]) == 4

    def test_sweep_csv_and_sidecar(self, tmp_path):
        cfg = {"command": "sweep", "params": {"eps": 0.1, "delta": 0.5},
               "sweep": {"command": "example-irreversibility", "parameter": "n", "values": [1, 2]}}
        out = tmp_path / "rates.csv"
        assert main(["--config", str(write(tmp_path, cfg)), "--out", str(out), "--jobs", "2"]) == 0
        assert out.read_text().startswith("n,eps,delta,grid,W,C,Wbar,Cbar_status,closed_form_deltas")
        assert json.loads(out.with_suffix(".json").read_text())["failed_rows"] == 0

    def test_tolerance_flag(self, tmp_path):
        path = write(tmp_path, extract_cfg())
        assert main(["--config", str(path), "--tol", "strict", "--out", str(tmp_path / "a.json")]) == 0
        with pytest.raises(SystemExit):
            main(["--config", str(path), "--tol", "sloppy"])

    def test_reports_byte_identical(self, tmp_path):
        path = write(tmp_path, extract_cfg())
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["--config", str(path), "--out", str(a)])
        main(["--config", str(path), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


def test_matrix_literal_round_trip():
    cfg = load_config(extract_cfg())
    np.testing.assert_allclose(np.array(cfg.p.generators[0])[..., 0], projector(1, 2).matrix)

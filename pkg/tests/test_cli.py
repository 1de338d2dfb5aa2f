import json
import math

import numpy as np
import pytest

from loewner_lab.cli import main
from loewner_lab.drivers import make_driver, write_driver_csv
from loewner_lab.forward import read_curve_csv


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def run(kind, cfg_path, out, extra=()):
    return main([kind, "--config", str(cfg_path), "--out", str(out), *extra])


class TestTraceKind:
    def test_zero_driver_trace(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {"kind": "trace", "driver": {"values": [0], "T": 1.0, "resample_to": 2000}},
        )
        out = tmp_path / "out"
        assert run("trace", cfg, out) == 0
        curve = read_curve_csv(out / "curve.csv")
        assert abs(curve.points[-1] - 2j) <= 1e-3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["curve.csv"]
        assert "config_sha256" in manifest and "versions" in manifest

    def test_malformed_json_exits_1_without_outputs(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        out = tmp_path / "out"
        assert run("trace", p, out) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "config-parse"
        assert not (out / "curve.csv").exists()

    def test_kind_mismatch_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, {"kind": "zip", "curve": {"file": "x"}})
        assert run("trace", cfg, tmp_path / "o") == 1

    def test_unknown_field_rejected(self, tmp_path, capsys):
        cfg = write_cfg(
            tmp_path,
            {"kind": "trace", "driver": {"values": [0], "T": 1.0}, "bogus": 1},
        )
        assert run("trace", cfg, tmp_path / "o") == 1
        assert json.loads(capsys.readouterr().err)["error"] == "config-validate"


class TestZipAndEnergyKinds:
    def test_zip_roundtrip(self, tmp_path):
        trace_cfg = write_cfg(
            tmp_path,
            {
                "kind": "trace",
                "driver": {"values": [0, 0.25, 0.5], "T": 1.0, "resample_to": 400},
            },
        )
        out1 = tmp_path / "o1"
        assert run("trace", trace_cfg, out1) == 0
        zip_cfg = write_cfg(
            tmp_path,
            {"kind": "zip", "curve": {"file": str(out1 / "curve.csv")}},
            name="zip.json",
        )
        out2 = tmp_path / "o2"
        assert run("zip", zip_cfg, out2) == 0
        summary = json.loads((out2 / "zip_summary.json").read_text())
        assert abs(summary["horizon"] - 1.0) < 0.02
        assert (out2 / "recovered_driver.csv").exists()
        assert (out2 / "capacity_profile.csv").exists()

    def test_energy(self, tmp_path):
        cfg = write_cfg(
            tmp_path, {"kind": "energy", "driver": {"values": [0, 0.3, -0.1], "T": 1.0}}
        )
        out = tmp_path / "o"
        assert run("energy", cfg, out) == 0
        assert json.loads((out / "energy.json").read_text())["energy"] == 0.25


class TestMcKinds:
    def test_event_row_and_thread_invariance(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "mc",
                "op": "event",
                "event": {"type": "driver-sup", "a": 1.0},
                "kappa": 0.5,
                "N": 2000,
                "n": 128,
                "seed": 4,
            },
        )
        o1, o8 = tmp_path / "o1", tmp_path / "o8"
        assert run("mc", cfg, o1, extra=("--threads", "1")) == 0
        assert run("mc", cfg, o8, extra=("--threads", "8")) == 0
        b1 = (o1 / "mc.csv").read_bytes()
        assert b1 == (o8 / "mc.csv").read_bytes()
        # rerun reproduces bytes exactly
        o3 = tmp_path / "o3"
        assert run("mc", cfg, o3) == 0
        assert b1 == (o3 / "mc.csv").read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "mc",
                "op": "event",
                "event": {"type": "driver-sup", "a": 1.0},
                "kappa": 0.5,
                "N": 500,
                "n": 64,
                "seed": 4,
            },
        )
        oa, ob = tmp_path / "a", tmp_path / "b"
        assert run("mc", cfg, oa, extra=("--seed", "99")) == 0
        assert run("mc", cfg, ob) == 0
        row_a = (oa / "mc.csv").read_text().splitlines()[1].split(",")
        row_b = (ob / "mc.csv").read_text().splitlines()[1].split(",")
        assert row_a[7] == "99" and row_b[7] == "4"

    def test_chi_square_op(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {"kind": "mc", "op": "chi-square", "kappa": 1.0, "m": 5, "N": 2000},
        )
        out = tmp_path / "o"
        assert run("mc", cfg, out) == 0
        stats = json.loads((out / "chi_square.json").read_text())
        assert abs(stats["mean"] - 5) < 0.5

    def test_missing_required_param(self, tmp_path):
        cfg = write_cfg(tmp_path, {"kind": "mc", "op": "event", "kappa": 1.0})
        assert run("mc", cfg, tmp_path / "o") == 1


class TestLdpSlopeKind:
    def test_rows_per_kappa(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "ldp-slope",
                "event": {"type": "driver-sup", "a": 1.0},
                "kappa_list": [0.4, 0.2],
                "N": 1000,
                "n": 128,
            },
        )
        out = tmp_path / "o"
        assert run("ldp-slope", cfg, out) == 0
        lines = (out / "ldp_slope.csv").read_text().splitlines()
        assert lines[0] == "kappa,N,hits,p_hat,se,kappa_log_p,low_hits"
        assert len(lines) == 3


class TestOptimizeKind:
    def test_endpoint_run(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "optimize",
                "m": 8,
                "constraint": {"type": "endpoint", "z": [0.0, 2.0], "tolerance": 0.05},
                "opts": {"rounds": 3, "inner_iters": 25, "n_perturbed_starts": 1, "n_trace": 64},
            },
        )
        out = tmp_path / "o"
        assert run("optimize", cfg, out) == 0
        res = json.loads((out / "opt_result.json").read_text())
        assert res["energy"] <= 1e-3
        assert res["converged"]
        assert (out / res["driver_file"]).exists()

    def test_infeasible_with_assertion_exits_2(self, tmp_path, capsys):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "optimize",
                "m": 8,
                "constraint": {"type": "avoid-disk", "center": [0.0, 1.41], "radius": 3.0},
                "assert_feasible": True,
                "opts": {"rounds": 2, "inner_iters": 15, "n_perturbed_starts": 1, "n_trace": 64},
            },
        )
        assert run("optimize", cfg, tmp_path / "o") == 2
        assert json.loads(capsys.readouterr().err)["error"] == "runtime"


class TestApproxConvergeKind:
    def test_csv_columns(self, tmp_path):
        cfg = write_cfg(
            tmp_path,
            {
                "kind": "approx-converge",
                "kappa": 1.0,
                "n_list": [8, 16],
                "beta": 0.5,
                "zeta": 0.05,
                "N": 10,
                "fine": 64,
            },
        )
        out = tmp_path / "o"
        assert run("approx-converge", cfg, out) == 0
        lines = (out / "convergence.csv").read_text().splitlines()
        assert lines[0].startswith("n,median_sup_error,violation_freq")
        assert len(lines) == 3


class TestVerifyBoundsKind:
    def test_small_suite(self, tmp_path):
        cfg = write_cfg(
            tmp_path, {"kind": "verify-bounds", "instances": 2, "grid": 64}
        )
        out = tmp_path / "o"
        assert run("verify-bounds", cfg, out) == 0
        reports = json.loads((out / "bounds_report.json").read_text())
        assert len(reports) == 6
        assert all(r["failures"] == [] for r in reports)


class TestEnvDefaultOut(object):
    def test_env_var_used(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LOEWNER_LAB_OUT", str(tmp_path / "envout"))
        cfg = write_cfg(
            tmp_path, {"kind": "energy", "driver": {"values": [0, 1], "T": 1.0}}
        )
        assert main(["energy", "--config", str(cfg)]) == 0
        assert (tmp_path / "envout" / "energy.json").exists()

import json
import subprocess
import sys

import numpy as np
import pytest

from cmvspec.cli import main

BASE = {
    "sampling": {"preset": "constant", "value": 0.5, "dim": 1},
    "frequency": {"preset": "golden"},
    "seed": 0,
}


def run_cli(args):
    return main(list(args))


def write_cfg(tmp_path, name, extra):
    cfg = dict(BASE)
    cfg.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestLyapunov:
    def test_zero_function_all_zero(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "sampling": {"preset": "zero", "dim": 1},
            "lyapunov": {"thetas": [0.0, 1.0], "scales": [20], "samples": 5},
        })
        out = tmp_path / "out"
        assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "lyapunov.csv").read_text().splitlines()
        assert lines[0] == "theta,n,L_n,std_error,method"
        for line in lines[1:]:
            assert abs(float(line.split(",")[2])) < 1e-12

    def test_floquet_row(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "lyapunov": {"thetas": [0.0], "scales": [100], "samples": 10},
        })
        out = tmp_path / "out"
        assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(out)]) == 0
        row = (out / "lyapunov.csv").read_text().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(np.log(np.sqrt(3)), abs=1e-3)

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "lyapunov": {"thetas": [0.5], "scales": [30], "samples": 8},
        })
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(["lyapunov", "--config", str(cfg), "--out", str(out1)]) == 0
        # rerun from the manifest with a different worker hint
        assert run_cli(["lyapunov", "--config", str(out1 / "manifest.json"),
                        "--out", str(out2), "--workers", "3"]) == 0
        assert (out1 / "lyapunov.csv").read_bytes() == \
               (out2 / "lyapunov.csv").read_bytes()
        assert (out1 / "manifest.json").read_bytes() == \
               (out2 / "manifest.json").read_bytes()


class TestSpectrumScan:
    def test_constant_gap_summary(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "spectrum": {"arc": [0.0, 2 * np.pi], "grid": 90, "window": 60,
                         "tol": 0.06, "phase_samples": 1},
        })
        out = tmp_path / "out"
        assert run_cli(["spectrum-scan", "--config", str(cfg),
                        "--out", str(out)]) == 0
        summary = json.loads((out / "arc_summary.json").read_text())
        assert len(summary["covered_arcs"]) == 1
        lo, hi = summary["covered_arcs"][0]
        assert lo == pytest.approx(np.pi / 3, abs=0.1)
        assert hi == pytest.approx(5 * np.pi / 3, abs=0.1)
        header = (out / "coverage.csv").read_text().splitlines()[0]
        assert header.startswith("theta,covered,best_dist,phase_x0")

    def test_malformed_arc_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "spectrum": {"arc": [1.0, 1.0], "grid": 8, "window": 10},
        })
        assert run_cli(["spectrum-scan", "--config", str(cfg),
                        "--out", str(tmp_path / "o")]) == 2


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        assert run_cli(["ldt", "--config", str(tmp_path / "nope.json")]) == 2

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run_cli(["ldt", "--config", str(p)]) == 2

    def test_missing_block(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {})
        assert run_cli(["ldt", "--config", str(cfg)]) == 2

    def test_bad_preset(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "sampling": {"preset": "bogus"},
            "ldt": {"n_list": [10]},
        })
        assert run_cli(["ldt", "--config", str(cfg)]) == 2

    def test_manifest_command_mismatch(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "lyapunov": {"thetas": [0.5], "scales": [10], "samples": 3},
        })
        out = tmp_path / "out"
        run_cli(["lyapunov", "--config", str(cfg), "--out", str(out)])
        assert run_cli(["ldt", "--config", str(out / "manifest.json")]) == 2


class TestLdtCommand:
    def test_writes_csv(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "ldt": {"theta": 0.0, "n_list": [20, 40], "tau": 0.3,
                    "samples": 20, "determinant": True},
        })
        out = tmp_path / "out"
        assert run_cli(["ldt", "--config", str(cfg), "--out", str(out)]) == 0
        mat = (out / "ldt_matrix.csv").read_text().splitlines()
        assert mat[0] == "n,estimate,wilson_lo,wilson_hi,L_n"
        assert len(mat) == 3
        assert (out / "ldt_determinant.csv").exists()


class TestLocalizeCommand:
    def test_profile_written(self, tmp_path):
        cfg = {
            "sampling": {"preset": "localization"},
            "frequency": {"preset": "sqrt"},
            "seed": 0,
            "localize": {"theta": 2.5, "n0": 12, "gamma_samples": 20,
                         "overrides": {"box_radius": 1e-4, "arc_radius": 1e-4}},
        }
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        rc = run_cli(["localize", "--config", str(p), "--out", str(out)])
        assert rc == 0
        verdict = json.loads((out / "localize.json").read_text())
        assert verdict["eigenvalue_distance"] < 1e-9
        profile = (out / "profile.csv").read_text().splitlines()
        assert profile[0] == "s,log_abs_u"
        assert len(profile) == 26    # 25 sites for n0=12


class TestIdentitySuite:
    def test_passes_on_default_corpus(self, tmp_path, capsys):
        cfg = {
            "sampling": {"preset": "two_mode", "coupling": 0.45},
            "frequency": {"preset": "sqrt"},
            "seed": 1,
            "identity": {"cases": 8},
        }
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        assert run_cli(["identity-suite", "--config", str(p),
                        "--out", str(out)]) == 0
        results = json.loads((out / "identity_suite.json").read_text())["results"]
        names = {r["case"] for r in results}
        assert names == {"unitarity", "factorization", "determinant_transfer",
                         "green_ratio", "poisson"}
        for r in results:
            assert r["residual"] <= r["threshold"]


class TestMultiscaleCommand:
    def test_depth0_report(self, tmp_path):
        cfg = {
            "sampling": {"preset": "localization"},
            "frequency": {"preset": "sqrt"},
            "seed": 0,
            "multiscale": {"theta": 2.5, "n0": 12, "depth": 0, "samples": 6,
                           "schedule": {"growth": 1.5, "overrides": {
                               "separation": 1e-4, "good_dist": 1e-4,
                               "box_radius": 1e-4, "arc_radius": 1e-4,
                               "c_threshold": 5e-4, "upsilon_floor": 1e-4,
                               "d_floor_log": -8.0, "solver_tol": 1e-9}}},
        }
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        rc = run_cli(["multiscale", "--config", str(p), "--out", str(out)])
        assert rc == 0
        data = json.loads((out / "multiscale.json").read_text())
        assert "depth0" in data and "advance" not in data
        assert set(data["depth0"]) == {"A", "B", "C", "D", "all_ok"}

    def test_bad_schedule_exits_2(self, tmp_path):
        cfg = {
            "sampling": {"preset": "localization"},
            "frequency": {"preset": "sqrt"},
            "multiscale": {"schedule": {"c0": 3.0, "c2": 3.5}},
        }
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        assert run_cli(["multiscale", "--config", str(p),
                        "--out", str(tmp_path / "o")]) == 2


def test_identity_threshold_violation_exits_3(tmp_path):
    cfg = {
        "sampling": {"preset": "two_mode", "coupling": 0.45},
        "frequency": {"preset": "sqrt"},
        "seed": 1,
        "identity": {"cases": 3, "threshold": 0.0},
    }
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert run_cli(["identity-suite", "--config", str(p),
                    "--out", str(tmp_path / "o")]) == 3


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "cmvspec.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "cmvspec" in proc.stdout

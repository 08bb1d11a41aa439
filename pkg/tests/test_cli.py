import json
import subprocess
import sys

import pytest

from nonharmonic.cli import main
from nonharmonic.config import (
    DEFAULT_CONFIG,
    ConfigError,
    resolve_config,
    validate_config,
)


def write_config(tmp_path, **overrides):
    cfg = {"version": 1}
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_default_is_valid(self):
        resolved = resolve_config(DEFAULT_CONFIG)
        assert resolved["model"]["h"] == 2.0
        assert resolved["task"]["truncation_terms"] == 3

    def test_unknown_keys_rejected(self):
        errors = validate_config({"version": 1, "bogus": 1})
        assert errors

    def test_zero_rho_rejected(self):
        errors = validate_config({"version": 1, "symbol": {"rho": 0.0}})
        assert any("rho" in e for e in errors)

    def test_missing_version_rejected(self):
        assert validate_config({}) != []

    def test_oversampling_enforced(self):
        with pytest.raises(ConfigError):
            resolve_config({"version": 1, "model": {"J": 64, "N_x": 128}})

    def test_partial_override_merges_defaults(self):
        resolved = resolve_config({"version": 1, "model": {"h": 4.0}})
        assert resolved["model"]["h"] == 4.0
        assert resolved["model"]["J"] == DEFAULT_CONFIG["model"]["J"]


class TestExitCodes:
    def test_invalid_config_exits_2(self, tmp_path, capsys):
        path = write_config(tmp_path, symbol={"rho": 0.0})
        code = main(["symbol", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2
        err = capsys.readouterr().err
        assert "config_errors" in err

    def test_malformed_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code = main(["system", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_non_elliptic_parametrix_exits_1(self, tmp_path):
        path = write_config(
            tmp_path,
            symbol={"family": "separable", "profile": "sin", "m": 2.0},
        )
        out = tmp_path / "out"
        code = main(["parametrix", "--config", str(path), "--out", str(out)])
        assert code == 1
        payload = json.loads((out / "payload.json").read_text())
        assert "error" in payload["results"]

    def test_system_task_exits_0(self, tmp_path):
        out = tmp_path / "out"
        code = main(["system", "--out", str(out), "--format", "json"])
        assert code == 0
        payload = json.loads((out / "payload.json").read_text())
        assert payload["task"] == "system"
        assert payload["results"]["biorthogonality_defect"] <= 1e-12
        # config echo carries resolved defaults
        assert payload["config"]["model"]["N_x"] == 512


class TestArtifacts:
    def test_csv_and_plots_written(self, tmp_path):
        out = tmp_path / "out"
        code = main(["compact", "--out", str(out), "--plots", "on"])
        assert code == 0
        assert (out / "shell_suprema.csv").exists()
        assert (out / "shell_suprema.svg").exists()
        assert (out / "singular_values.csv").exists()
        assert (out / "run_meta.json").exists()

    def test_json_format_skips_series(self, tmp_path):
        out = tmp_path / "out"
        code = main(["compose", "--out", str(out), "--format", "json"])
        assert code == 0
        assert not list(out.glob("*.csv"))

    def test_seed_flag_overrides_config(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["apply", "--out", str(out1), "--seed", "7"]) == 0
        assert main(["apply", "--out", str(out2), "--seed", "7"]) == 0
        p1 = json.loads((out1 / "payload.json").read_text())
        p2 = json.loads((out2 / "payload.json").read_text())
        assert p1 == p2
        assert p1["config"]["seed"] == 7

    def test_symbol_membership_verdict_in_payload(self, tmp_path):
        path = write_config(
            tmp_path, symbol={"family": "multiplier_power", "m": 2.0}
        )
        out = tmp_path / "out"
        assert main(["symbol", "--config", str(path), "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        assert payload["results"]["seminorms"]["member_M"] is True

    def test_csv_symbol_with_wrong_order_fails_membership(self, tmp_path):
        # sigma(x, j) = j with claimed order 0: verdict false in the payload
        import numpy as np

        from nonharmonic.model import make_system
        from nonharmonic.symbols import from_values
        from nonharmonic.weights import standard_weight

        system = make_system(h=2.0, J=64, n_x=512)
        weight = standard_weight(system.spec)
        vals = np.broadcast_to(
            system.window.indices.astype(complex),
            (system.grid.n_x, system.window.size),
        ).copy()
        sym = from_values(vals, system, weight, order=0.0)
        csv_path = tmp_path / "index_symbol.csv"
        sym.export_csv(csv_path)
        cfg_path = write_config(
            tmp_path, symbol={"family": "csv", "csv": str(csv_path), "m": 0.0}
        )
        out = tmp_path / "out"
        assert main(["symbol", "--config", str(cfg_path), "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        assert payload["results"]["seminorms"]["member_S"] is False

    def test_parametrix_writes_term_side_files(self, tmp_path):
        out = tmp_path / "out"
        assert main(["parametrix", "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        for name in payload["results"]["term_files"]:
            assert (out / name).exists()

    def test_hypoellipticity_block(self, tmp_path):
        path = write_config(
            tmp_path,
            symbol={"family": "multiplier_power", "m": 2.0},
            task={"hypoellipticity_ell": 2.0},
        )
        out = tmp_path / "out"
        assert main(["symbol", "--config", str(path), "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        hypo = payload["results"]["hypoellipticity"]
        assert hypo["verdict"] is True
        assert hypo["c1_fit"] == pytest.approx(1.0, abs=1e-9)

    def test_smoothed_integer_weight_task(self, tmp_path):
        path = write_config(tmp_path, weight={"kind": "smoothed_integer"})
        out = tmp_path / "out"
        assert main(["weights", "--config", str(path), "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        assert payload["results"]["growth"]["verdict"] is True

    def test_iterative_solve_skewed_model(self, tmp_path):
        # the two-level iteration must converge for h != 1 as well
        path = write_config(
            tmp_path,
            model={"h": 2.0},
            symbol={"family": "elliptic_demo", "m": 2.0},
            task={"solver_method": "parametrix_iteration", "lambda": 1.0},
        )
        out = tmp_path / "out"
        assert main(["solve", "--config", str(path), "--out", str(out)]) == 0
        payload = json.loads((out / "payload.json").read_text())
        assert payload["results"]["converged"] is True
        assert payload["results"]["residual_history"][-1] <= 1e-8

    def test_solve_writes_history(self, tmp_path):
        path = write_config(
            tmp_path,
            model={"h": 1.0},
            task={"solver_method": "parametrix_iteration", "lambda": 2.0},
        )
        out = tmp_path / "out"
        assert main(["solve", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "solve_residual_history.csv").exists()

    def test_determinism_same_payload_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["compose", "--out", str(out1), "--format", "json"]) == 0
        assert main(["compose", "--out", str(out2), "--format", "json"]) == 0
        assert (out1 / "payload.json").read_bytes() == (out2 / "payload.json").read_bytes()


class TestConsoleEntryPoint:
    def test_subprocess_usage_error_exits_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "nonharmonic.cli", "bogus-task"],
            capture_output=True,
        )
        assert proc.returncode == 2

    def test_subprocess_weights_runs(self, tmp_path):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "nonharmonic.cli",
                "weights",
                "--out",
                str(tmp_path / "w"),
            ],
            capture_output=True,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        assert (tmp_path / "w" / "payload.json").exists()

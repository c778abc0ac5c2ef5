import csv
import json

import numpy as np
import pytest

from nsdde.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, format_value, parse_config, run


CONVERGE = ["converge", "--levels", "4,8", "--ref", "16", "--T", "1", "--paths", "20", "--bootstrap", "50"]


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestParsing:
    def test_params_and_lists(self):
        config = parse_config(["converge", "--levels", "8,16", "--param", "a=0.25", "--model", "example-a"])
        assert config.levels == [8, 16]
        assert config.params == {"a": 0.25}
        assert config.study_config().model_params == {"a": 0.25}

    def test_preset_with_override(self):
        study = parse_config(["converge", "--preset", "jump-rate", "--paths", "7"]).study_config()
        assert study.driver == "jump"
        assert study.n_paths == 7
        assert study.m_ref == 256

    def test_jump_driver_defaults_to_jump_model(self):
        config = parse_config(["simulate", "--driver", "jump"])
        assert config.setting("model") == "example-jump"
        assert config.setting("m") == 64


class TestFormatValue:
    def test_values(self):
        assert format_value(None) == ""
        assert format_value(True) == "true"
        assert format_value(3) == "3"
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(np.float64(0.5)) == "0.5"
        assert format_value({"b": [1, 2], "a": 1}) == '{"a":1,"b":[1,2]}'


class TestCommands:
    def test_list_models(self, capsys):
        assert run(["list-models"]) == EXIT_OK
        assert capsys.readouterr().out.split() == ["example-a", "example-b", "example-jump"]

    def test_converge_is_reproducible(self, tmp_path):
        for name in ("a", "b"):
            assert run([*CONVERGE, "--out", str(tmp_path / name)]) == EXIT_OK
        for filename in ("levels.csv", "moments.csv", "rate.csv"):
            assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()
        levels = _rows(tmp_path / "a" / "levels.csv")
        assert [row["m"] for row in levels] == ["4", "8"]
        assert levels[0]["delta"] == "0.25"
        assert levels[0]["seed"] == "0"
        rate = _rows(tmp_path / "a" / "rate.csv")
        assert len(rate) == 1
        assert float(rate[0]["delta"]) == 1 / 16
        assert float(rate[0]["moment_slope"]) == 2 * float(rate[0]["slope"])
        assert float(rate[0]["moment_ci_lo"]) == 2 * float(rate[0]["ci_lo"])
        assert not list(tmp_path.glob("*/*.tmp"))

    def test_inadmissible_gauge_writes_nothing(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert run([*CONVERGE, "--epsilon", "0.5", "--out", str(out)]) == EXIT_VALIDATION
        assert "Δ^{1/4}·g(Δ) ≤ 1" in capsys.readouterr().err
        assert not out.exists()

    def test_unknown_flag(self, tmp_path, capsys):
        assert run(["converge", "--bogus", "--out", str(tmp_path)]) == EXIT_VALIDATION
        assert capsys.readouterr().err.startswith("error:")

    def test_out_of_range_value(self, tmp_path):
        assert run(["simulate", "--tau", "-1", "--out", str(tmp_path)]) == EXIT_VALIDATION
        assert run(["simulate", "--model", "example-z", "--out", str(tmp_path)]) == EXIT_VALIDATION
        assert not list(tmp_path.iterdir())

    def test_single_level_keeps_failed_files(self, tmp_path):
        out = tmp_path / "out"
        argv = ["converge", "--levels", "16", "--ref", "16", "--T", "1", "--paths", "5", "--out", str(out)]
        assert run(argv) == EXIT_RUNTIME
        assert (out / "levels.csv.failed").exists()
        assert not (out / "levels.csv").exists()
        assert not (out / "rate.csv").exists()

    def test_simulate_rows(self, tmp_path):
        assert run(["simulate", "--m", "4", "--T", "1", "--paths", "3", "--out", str(tmp_path)]) == EXIT_OK
        rows = _rows(tmp_path / "paths.csv")
        assert len(rows) == 27
        assert list(rows[0]) == ["path", "k", "t", "y0", "delta", "g_delta", "radius", "seed"]
        assert rows[0]["k"] == "-4" and rows[0]["t"] == "-1"
        assert {row["y0"] for row in rows if int(row["k"]) <= 0} == {"1"}
        assert sorted({row["path"] for row in rows}) == ["0", "1", "2"]

    def test_simulate_jump_driver(self, tmp_path):
        argv = ["simulate", "--driver", "jump", "--m", "4", "--T", "1", "--paths", "3", "--intensity", "2"]
        assert run([*argv, "--out", str(tmp_path)]) == EXIT_OK
        rows = _rows(tmp_path / "paths.csv")
        assert "jumps_in_interval" in rows[0]
        assert all(row["jumps_in_interval"] == "0" for row in rows if int(row["k"]) <= 0)

    def test_gauge_mode_conflicts_with_driver(self, tmp_path, capsys):
        argv = ["simulate", "--driver", "brownian", "--gauge-mode", "jump", "--out", str(tmp_path)]
        assert run(argv) == EXIT_VALIDATION
        assert "error:" in capsys.readouterr().err

    def test_driver_conflicts_with_model(self, tmp_path):
        assert run(["simulate", "--model", "example-b", "--driver", "jump", "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_check_assumptions(self, tmp_path, capsys):
        argv = ["check-assumptions", "--assumption", "A1", "--assumption", "A3", "--samples", "500"]
        assert run([*argv, "--out", str(tmp_path)]) == EXIT_OK
        rows = _rows(tmp_path / "audit.csv")
        assert [row["assumption"] for row in rows] == ["A1", "A3"]
        assert all(row["passed"] == "true" for row in rows)
        assert rows[0]["radius"] == ""
        assert rows[0]["n_samples"] == "500"
        assert int(rows[0]["n_evaluations"]) >= 505
        assert set(json.loads(rows[0]["witness"])) >= {"x", "y"}
        assert "2/2 passed" in capsys.readouterr().out

    def test_check_all_with_radius(self, tmp_path):
        argv = ["check-assumptions", "--all", "--delta", "0.0625", "--samples", "500", "--out", str(tmp_path)]
        assert run(argv) == EXIT_OK
        rows = _rows(tmp_path / "audit.csv")
        assert "A4'" in [row["assumption"] for row in rows]
        assert float(rows[0]["delta"]) == 0.0625

    def test_check_needs_selection(self, tmp_path):
        assert run(["check-assumptions", "--out", str(tmp_path)]) == EXIT_VALIDATION
        assert run(["check-assumptions", "--all", "--assumption", "A1", "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NSDDE_OUTPUT_DIR", str(tmp_path / "env-out"))
        assert run(["check-assumptions", "--assumption", "A1", "--samples", "100"]) == EXIT_OK
        assert (tmp_path / "env-out" / "audit.csv").exists()

    @pytest.mark.parametrize("value", ["-1", "x"])
    def test_bad_thread_count(self, tmp_path, monkeypatch, value):
        monkeypatch.setenv("NSDDE_THREADS", value)
        assert run(["simulate", "--m", "4", "--T", "1", "--paths", "2", "--out", str(tmp_path)]) == EXIT_VALIDATION

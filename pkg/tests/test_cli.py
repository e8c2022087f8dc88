"""Command-line front end: formats, exit codes, and agreement with the library."""

import io
import json

import pytest

from bmdlimits.cli import FORMATS, emit, run
from bmdlimits.parallel import min_tests_iid
from bmdlimits.passive import PassiveDesign, min_contest_size
from bmdlimits.repro import build_manifest, manifest_passes


def invoke(argv):
    out = io.StringIO()
    code = run(argv, out)
    return code, out.getvalue()


class TestEmit:
    ROWS = [{"a": 1, "b": 2.5}, {"a": 3, "b": None}]

    def test_csv(self):
        out = io.StringIO()
        emit(self.ROWS, "csv", out)
        assert out.getvalue() == "a,b\n1,2.5\n3,\n"

    def test_json_lines(self):
        out = io.StringIO()
        emit(self.ROWS, "json-lines", out)
        lines = out.getvalue().splitlines()
        assert [json.loads(line) for line in lines] == self.ROWS

    def test_markdown(self):
        out = io.StringIO()
        emit(self.ROWS, "markdown", out)
        lines = out.getvalue().splitlines()
        assert lines[0].startswith("| a") and "|" in lines[1]
        assert len(lines) == 4

    def test_empty(self):
        out = io.StringIO()
        emit([], "csv", out)
        assert out.getvalue() == ""


class TestExitCodes:
    def test_success(self):
        code, text = invoke(["cardinality", "--preset", "optimistic"])
        assert code == 0
        assert "6144000" in text

    def test_domain_error_is_one(self):
        code, _ = invoke(
            ["passive", "--margin", "0", "--detect-rate", "0.07", "--base-rate", "0.005"]
        )
        assert code == 1

    def test_infeasible_is_one(self):
        code, _ = invoke(["oracle", "--population", "100", "--flawed", "0"])
        assert code == 1

    def test_missing_file_is_one(self):
        code, _ = invoke(["feasibility", "--data", "/nonexistent.csv"])
        assert code == 1

    def test_usage_error_is_two(self):
        with pytest.raises(SystemExit) as exc:
            run(["no-such-command"])
        assert exc.value.code == 2

    def test_missing_required_flag_is_two(self):
        with pytest.raises(SystemExit) as exc:
            run(["oracle"])
        assert exc.value.code == 2


class TestFormats:
    def test_all_formats_render(self):
        for fmt in FORMATS:
            code, text = invoke(
                ["--format", fmt, "parallel", "--p", "0.25", "--confidence", "0.95"]
            )
            assert code == 0
            assert "11" in text

    def test_env_var_default(self, monkeypatch):
        monkeypatch.setenv("BMDLIMITS_FORMAT", "json-lines")
        code, text = invoke(["cardinality", "--preset", "optimistic"])
        assert code == 0
        assert json.loads(text)["cardinality"] == 6_144_000

    def test_flag_overrides_env(self, monkeypatch):
        monkeypatch.setenv("BMDLIMITS_FORMAT", "json-lines")
        code, text = invoke(["--format", "csv", "cardinality", "--preset", "optimistic"])
        assert code == 0
        assert text.startswith("space,cardinality\n")


class TestAgreementWithLibrary:
    def test_passive_single(self):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "passive",
                "--margin",
                "0.03",
                "--detect-rate",
                "0.07",
                "--base-rate",
                "0.005",
            ]
        )
        assert code == 0
        row = json.loads(text)
        sol = min_contest_size(PassiveDesign(0.03, 0.07, 0.005, 0.05, 0.05))
        assert row["contest_size"] == sol.contest_size == 52_310
        assert row["alarm_threshold"] == sol.alarm_threshold

    def test_passive_grid_shape(self):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "passive",
                "--margin",
                "0.03,0.05",
                "--detect-rate",
                "0.07,0.25",
                "--base-rate",
                "0.005",
            ]
        )
        assert code == 0
        rows = [json.loads(line) for line in text.splitlines()]
        assert len(rows) == 4

    def test_passive_grid_requires_equal_budgets(self):
        code, _ = invoke(
            [
                "passive",
                "--margin",
                "0.03,0.05",
                "--detect-rate",
                "0.07",
                "--base-rate",
                "0.005",
                "--fp",
                "0.05",
                "--fn",
                "0.01",
            ]
        )
        assert code == 1

    def test_parallel_min_tests(self):
        code, text = invoke(
            ["--format", "json-lines", "parallel", "--p", "0.01", "--confidence", "0.95"]
        )
        assert code == 0
        assert json.loads(text)["min_tests"] == min_tests_iid(0.01, 0.95) == 299

    def test_parallel_electorate(self):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "parallel",
                "--tests-per-day",
                "13",
                "--capacity",
                "140",
                "--altered-fraction",
                "0.005",
                "--confidence",
                "0.95",
            ]
        )
        assert code == 0
        row = json.loads(text)
        assert row["bmds"] == 47
        assert row["voters"] == 6_580

    def test_oracle(self):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "oracle",
                "--population",
                "2980",
                "--flawed",
                "15",
                "--confidence",
                "0.95",
            ]
        )
        assert code == 0
        assert json.loads(text)["min_samples"] == 539

    def test_minimax_table_has_published_columns(self):
        code, text = invoke(["--format", "json-lines", "minimax"])
        assert code == 0
        rows = [json.loads(line) for line in text.splitlines()]
        assert len(rows) == 16
        assert all("published_millions" in r and "ratio_to_published" in r for r in rows)

    def test_simulate_scenario(self, scenario_dir):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "simulate",
                "--scenario",
                str(scenario_dir / "whole_space_flip.json"),
            ]
        )
        assert code == 0
        row = json.loads(text)
        assert abs(row["empirical_detection"]["value"] - 0.96875) < 0.006

    def test_simulate_worker_invariance(self, scenario_dir):
        args = ["simulate", "--scenario", str(scenario_dir / "whole_space_flip.json")]
        _, a = invoke(args + ["--workers", "1"])
        _, b = invoke(args + ["--workers", "3"])
        assert a == b

    def test_feasibility_summary(self, data_dir):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "feasibility",
                "--data",
                str(data_dir / "county_turnout.csv"),
            ]
        )
        assert code == 0
        metrics = {r["metric"]: r["value"] for r in map(json.loads, text.splitlines())}
        assert metrics["jurisdictions"] == 3017
        assert metrics["median_turnout"] == 2980
        assert metrics["fraction_below_43000"] > 2 / 3

    def test_feasibility_join(self, data_dir):
        code, text = invoke(
            [
                "--format",
                "json-lines",
                "feasibility",
                "--data",
                str(data_dir / "county_turnout.csv"),
                "--margin",
                "0.03",
            ]
        )
        assert code == 0
        metrics = {r["metric"]: r["value"] for r in map(json.loads, text.splitlines())}
        assert metrics["required_contest_size"] == 52_310
        assert metrics["states_where_majority_infeasible"] == 37


class TestRepro:
    def test_exit_code_matches_manifest(self):
        code, text = invoke(["--format", "json-lines", "repro"])
        assert code == (0 if manifest_passes(build_manifest()) else 1)
        rows = [json.loads(line) for line in text.splitlines()]
        assert all(r["status"] in ("PASS", "DIFF", "FAIL") for r in rows)

    def test_byte_stable(self):
        _, a = invoke(["repro"])
        _, b = invoke(["repro"])
        assert a == b

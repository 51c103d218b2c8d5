"""Integration tests for CLI commands."""

import json

import pytest
import typer

from meanscope import __version__
from meanscope.cli import app, main


def _json(result) -> dict:
    return json.loads(result.stdout)


class TestMeanCommand:
    """Tests for 'mean' CLI command."""

    def test_quadratic_mean(self, cli_runner):
        """Test the square mean of (1, 7) is 5."""
        result = cli_runner.invoke(app, ["mean", "-g", "power(2)", "-x", "1,7"])

        assert result.exit_code == 0
        assert "5.0" in result.stdout

    def test_json_report(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "power(2)", "-x", "1,7", "--json"])

        assert result.exit_code == 0
        data = _json(result)
        assert data["mean"]["value"] == pytest.approx(5.0, rel=1e-12)
        assert data["config"]["command"] == "mean"
        assert data["config"]["points"] == [1.0, 7.0]
        assert data["config"]["window"] == {"lo": 0.001, "hi": 1000.0}
        assert data["generator"]["spec"] == "power(2.0)"
        assert data["generator"]["direction"] == "inc"

    def test_numeric_flag(self, cli_runner):
        args = ["mean", "-g", "x^2 + x", "-x", "1,3", "--numeric", "--json"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 0
        assert _json(result)["mean"]["value"] == pytest.approx(2.1925824035672520, rel=1e-9)
        assert _json(result)["config"]["numeric"] is True

    def test_clipped_window_reported(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "exp(1)", "-x", "1,2", "--json"])

        assert result.exit_code == 0
        generator = _json(result)["generator"]
        assert generator["requested_window"] == {"lo": 0.001, "hi": 1000.0}
        assert generator["window"]["hi"] < 1000.0

    def test_non_monotone_generator(self, cli_runner):
        """Test construction errors exit with 65."""
        result = cli_runner.invoke(app, ["mean", "-g", "x - x^2", "-x", "1"])

        assert result.exit_code == 65
        assert "MonotonicityViolation" in result.output

    def test_non_monotone_json_envelope(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "x - x^2", "-x", "1", "--json"])

        assert result.exit_code == 65
        error = _json(result)["error"]
        assert error["type"] == "MonotonicityViolation"
        assert len(error["witness"]) == 2

    def test_syntax_error(self, cli_runner):
        """Test syntax errors exit with 64 and carry the offset."""
        result = cli_runner.invoke(app, ["mean", "-g", "power(2", "-x", "1", "--json"])

        assert result.exit_code == 64
        error = _json(result)["error"]
        assert error["type"] == "GeneratorSyntaxError"
        assert error["position"] == 8

    def test_entry_outside_window(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "power(2)", "-x", "1,1e4"])

        assert result.exit_code == 65
        assert "DomainError" in result.output

    def test_non_positive_entry(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "power(2)", "-x", "1,-2"])

        assert result.exit_code == 64

    def test_bad_window(self, cli_runner):
        result = cli_runner.invoke(app, ["mean", "-g", "power(2)", "-x", "1", "--window", "5:1"])

        assert result.exit_code == 64
        assert "--window" in result.output


class TestAlphaAndKinks:
    """Tests for 'alpha' and 'kinks' CLI commands."""

    def test_alpha_quadlin(self, cli_runner):
        result = cli_runner.invoke(app, ["alpha", "-g", "quadlin(1)", "--json"])

        assert result.exit_code == 0
        alpha = _json(result)["alpha"]
        assert alpha["value"] == pytest.approx(1.0, abs=1e-3)
        assert alpha["pattern_ok"] is True

    def test_alpha_unbounded(self, cli_runner):
        result = cli_runner.invoke(app, ["alpha", "-g", "power(2)", "--json"])

        assert _json(result)["alpha"]["value"] == "inf"

    def test_alpha_text(self, cli_runner):
        result = cli_runner.invoke(app, ["alpha", "-g", "log"])

        assert result.exit_code == 0
        assert "sign pattern broken" in result.stdout

    def test_kinks(self, cli_runner):
        """Test 2x + |x - 1| has one first-order kink and no second-order one."""
        result = cli_runner.invoke(app, ["kinks", "-g", "spline(1; 1, 3; 0, 0)", "--json"])

        assert result.exit_code == 0
        first, second = _json(result)["kinks"]
        assert first["order"] == 1 and second["order"] == 2
        assert len(first["points"]) == 1
        assert first["points"][0]["x"] == pytest.approx(1.0, abs=1e-4)

    def test_kinks_text(self, cli_runner):
        result = cli_runner.invoke(app, ["kinks", "-g", "quadlin(2)"])

        assert result.exit_code == 0
        assert "Found 1 kinks" in result.stdout


class TestCheckCommand:
    """Tests for 'check' and 'compare' CLI commands."""

    def test_pass_exits_zero(self, cli_runner):
        args = ["check", "-g", "power(2)", "-c", "direct", "--samples", "500"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 0
        assert "direct" in result.stdout

    def test_fail_exits_one(self, cli_runner):
        args = ["check", "-g", "power(0.5)", "-c", "ma_bound", "--samples", "500", "--json"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 1
        (verdict,) = _json(result)["checkers"]
        assert verdict["status"] == "fail"
        assert verdict["counterexample"]["kind"] == "ma_bound"

    def test_inconclusive_exits_two(self, cli_runner):
        args = ["check", "-g", "quadlin(1)", "-c", "ratio_convex", "--samples", "200"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 2

    def test_unknown_checker(self, cli_runner):
        result = cli_runner.invoke(app, ["check", "-g", "power(2)", "-c", "nope"])

        assert result.exit_code == 64
        assert "unknown checker" in result.output

    def test_bad_arity(self, cli_runner):
        args = ["check", "-g", "power(2)", "-c", "direct", "--arity", "1"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 64

    def test_compare(self, cli_runner):
        args = ["compare", "-g", "power(2)", "-g", "power(3)", "--samples", "500", "--json"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 0
        data = _json(result)
        assert data["other"]["spec"] == "power(3.0)"
        assert data["checkers"][0]["id"] == "compare"

    def test_compare_needs_two(self, cli_runner):
        result = cli_runner.invoke(app, ["compare", "-g", "power(2)"])

        assert result.exit_code == 64


class TestBatteryCommand:
    """Tests for 'battery' CLI command."""

    def test_exp_not_subadditive(self, cli_runner):
        args = ["battery", "-g", "exp(1)", "--seed", "42", "--samples", "2000", "--json"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 1
        data = _json(result)
        assert data["resolution"] == "not_subadditive"
        assert data["alpha"]["value"] == "inf"
        assert data["config"]["seed"] == 42
        assert len(data["checkers"]) == 11

    def test_json_is_reproducible(self, cli_runner):
        """Test identical arguments give byte-identical reports."""
        args = ["battery", "-g", "exp(1)", "--seed", "42", "--samples", "1000", "--json"]
        first = cli_runner.invoke(app, args)
        second = cli_runner.invoke(app, args)

        assert first.stdout == second.stdout

    def test_thread_count_does_not_change_report(self, cli_runner, monkeypatch):
        args = ["battery", "-g", "power(0.5)", "--seed", "3", "--samples", "1500", "--json"]
        monkeypatch.setenv("MEANSCOPE_THREADS", "1")
        serial = cli_runner.invoke(app, args)
        monkeypatch.setenv("MEANSCOPE_THREADS", "4")
        threaded = cli_runner.invoke(app, args)

        assert serial.exit_code == threaded.exit_code == 1
        assert serial.stdout == threaded.stdout

    def test_text_output(self, cli_runner):
        result = cli_runner.invoke(app, ["battery", "-g", "power(2)", "--samples", "1000"])

        assert result.exit_code == 0
        assert "Resolution: subadditive" in result.stdout

    def test_short_circuit(self, cli_runner):
        args = ["battery", "-g", "log", "--short-circuit", "--samples", "500", "--json"]
        result = cli_runner.invoke(app, args)

        assert result.exit_code == 1
        data = _json(result)
        assert data["short_circuited"] is True
        assert [v["id"] for v in data["checkers"]] == ["ma_bound"]

    def test_short_circuit_off_by_default(self, cli_runner):
        """Test the help states the default and a plain run reports every equivalent condition."""
        command = typer.main.get_command(app).commands["battery"]
        option = next(p for p in command.params if p.name == "short_circuit")
        assert option.default is False
        assert "Off by default" in option.help

        result = cli_runner.invoke(app, ["battery", "-g", "log", "--samples", "500", "--json"])
        data = _json(result)
        assert data["short_circuited"] is False
        ids = {v["id"] for v in data["checkers"]}
        assert {"direct", "phi", "psi", "criterion_v"} <= ids


class TestMainEntryPoint:
    """Tests for main() exit-code mapping."""

    def test_usage_error_maps_to_64(self, capsys):
        assert main(["mean", "--bogus"]) == 64
        assert "--bogus" in capsys.readouterr().err

    def test_missing_option_maps_to_64(self, capsys):
        assert main(["mean", "-g", "power(2)"]) == 64

    def test_success(self, capsys):
        assert main(["mean", "-g", "power(2)", "-x", "1,7"]) == 0
        assert "5.0" in capsys.readouterr().out

    def test_check_exit_code_propagates(self, capsys):
        code = main(["check", "-g", "power(0.5)", "-c", "f_convex", "--samples", "300"])
        assert code == 1

    def test_version(self, cli_runner):
        result = cli_runner.invoke(app, ["version"])

        assert result.exit_code == 0
        assert f"meanscope version {__version__}" in result.stdout

"""
Integration tests for the expofit command line.

Fitting reports are read back from --out files; only summaries and listings are read from the output.
"""

import json
import logging

import numpy as np
import pytest
import yaml

from expofit_cli import __version__
from expofit_cli.cli.main import cli
from expofit_cli.core.dataset import Dataset, load
from expofit_cli.main import run
from expofit_cli.settings import reload_settings, settings


def invoke_report(cli_runner, temp_dir, args, name="report.json", expect=0):
    out = temp_dir / name
    result = cli_runner.invoke(cli, [*args, "--out", str(out)])
    assert result.exit_code == expect, result.output
    return json.loads(out.read_text()) if expect == 0 else None


class TestMinimaxCommands:
    def test_fit_minimax_limit_paradigm(self, cli_runner, temp_dir, paradigm_file, limit_paradigm):
        report = invoke_report(cli_runner, temp_dir, ["fit-minimax", str(paradigm_file)])
        assert report["command"] == "fit-minimax"
        assert report["version"] == __version__
        assert report["inputs_digest"] == limit_paradigm.digest()
        assert report["taxonomy"]["tag"] == "LimitNegInf"
        assert report["model"]["values"] == [2.0, 1.0, 1.0, 1.0]
        assert report["error"] == 1.0
        assert "elapsed" in report["timing"]

    def test_plot_output(self, cli_runner, temp_dir, paradigm_file):
        plot = temp_dir / "plot.csv"
        args = ["fit-minimax", str(paradigm_file), "--out", str(temp_dir / "r.json"), "--plot", str(plot)]
        result = cli_runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        lines = plot.read_text().splitlines()
        assert lines[0] == "t,T,fitted,lower,upper,residual,relative_error,extremal"
        rows = np.loadtxt(plot, delimiter=",", skiprows=1)
        assert rows.shape == (4, 8)
        assert rows[:, 7].tolist() == [1.0, 1.0, 0.0, 1.0]

    def test_fit_minimax_from_stdin(self, cli_runner, temp_dir, limit_paradigm):
        out = temp_dir / "stdin.json"
        result = cli_runner.invoke(cli, ["fit-minimax", "--out", str(out)], input=limit_paradigm.serialize())
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["error"] == 1.0

    def test_fit_quartet(self, cli_runner, temp_dir, quartet_file):
        report = invoke_report(cli_runner, temp_dir, ["fit-quartet", str(quartet_file)])
        assert report["model"]["kind"] == "exponential"
        assert report["model"]["a"] == pytest.approx(4.0, rel=1e-8)
        assert report["model"]["k"] == pytest.approx(-0.5, rel=1e-8)
        assert report["error"] == pytest.approx(0.1, abs=1e-9)
        assert report["quartet"] == [0, 1, 2, 3]

    def test_fit_line(self, cli_runner, temp_dir):
        data = temp_dir / "tent.csv"
        data.write_text("0,0\n1,1\n2,0\n")
        report = invoke_report(cli_runner, temp_dir, ["fit-line", str(data)])
        assert report["model"]["kind"] == "line"
        assert report["error"] == pytest.approx(0.5)
        assert report["certificate"]["indices"] == [0, 1, 2]

    def test_classify(self, cli_runner, temp_dir, paradigm_file):
        report = invoke_report(cli_runner, temp_dir, ["classify", str(paradigm_file)])
        assert report["taxonomy"] == {
            "tag": "LimitNegInf",
            "orientation": {"reflect_t": False, "negate_T": False},
            "witness": [0, 1, 3],
        }
        assert report["model"] is None

    def test_band(self, cli_runner, temp_dir, paradigm_file):
        report = invoke_report(cli_runner, temp_dir, ["band", str(paradigm_file)])
        assert report["band"]["upper"] == [3.0, 2.0, 2.0, 2.0]
        assert report["band"]["lower"] == [1.0, 0.0, 0.0, 0.0]

    def test_runs_are_deterministic(self, cli_runner, temp_dir, quartet_file):
        first = invoke_report(cli_runner, temp_dir, ["fit-minimax", str(quartet_file)], "a.json")
        second = invoke_report(cli_runner, temp_dir, ["fit-minimax", str(quartet_file)], "b.json")
        first.pop("timing")
        second.pop("timing")
        assert first == second

    def test_verbose_summary(self, cli_runner, temp_dir, quartet_file):
        args = ["--verbose", "fit-minimax", str(quartet_file), "--out", str(temp_dir / "v.json")]
        result = cli_runner.invoke(cli, args)
        assert result.exit_code == 0, result.output


class TestSimulation:
    def test_cooling_round_trip(self, cli_runner, temp_dir):
        data = temp_dir / "cooling.csv"
        result = cli_runner.invoke(cli, ["simulate-cooling", "--out", str(data)])
        assert result.exit_code == 0, result.output
        assert load(data).n == 12
        report = invoke_report(cli_runner, temp_dir, ["fit-minimax", str(data)])
        assert report["taxonomy"]["tag"] == "InteriorExponential"
        assert report["model"]["k"] == pytest.approx(-0.0026042, abs=1e-5)
        assert report["error"] == pytest.approx(0.01, rel=1e-6)
        assert report["quartet"] == [0, 3, 7, 11]

    def test_cooling_index_out_of_range(self, cli_runner, temp_dir):
        result = cli_runner.invoke(cli, ["simulate-cooling", "--indices", "0,99", "--out", str(temp_dir / "c.csv")])
        assert result.exit_code == 2

    def test_demand_round_trip(self, cli_runner, temp_dir):
        data = temp_dir / "demand.csv"
        args = ["simulate-demand", "--noise", "0", "--seed", "1", "--out", str(data)]
        result = cli_runner.invoke(cli, [*args, "--report", str(temp_dir / "sim.json")])
        assert result.exit_code == 0, result.output
        assert json.loads((temp_dir / "sim.json").read_text())["seed"] == 1
        report = invoke_report(cli_runner, temp_dir, ["fit-tac", "--model", "demand", str(data)])
        assert report["model"]["pattern"] == "demand"
        assert report["parameters"]["Q0"] == pytest.approx(48.0, rel=1e-4)
        assert report["parameters"]["k"] == pytest.approx(3.42, rel=1e-4)
        assert report["parameters"]["alpha"] == pytest.approx(0.006, rel=1e-4)
        assert report["diagnostics"]["converged"] is True

    def test_seed_from_environment(self, cli_runner, temp_dir, monkeypatch):
        monkeypatch.setenv("EXPOFIT_SEED", "123")
        reload_settings()
        result = cli_runner.invoke(
            cli, ["simulate-demand", "--out", str(temp_dir / "d.csv"), "--report", str(temp_dir / "sim.json")]
        )
        assert result.exit_code == 0, result.output
        assert json.loads((temp_dir / "sim.json").read_text())["seed"] == 123

    def test_same_seed_same_data(self, cli_runner, temp_dir):
        for name in ("one.csv", "two.csv"):
            result = cli_runner.invoke(cli, ["simulate-demand", "--seed", "9", "--out", str(temp_dir / name)])
            assert result.exit_code == 0, result.output
        assert (temp_dir / "one.csv").read_text() == (temp_dir / "two.csv").read_text()

    def test_expar_series(self, cli_runner, temp_dir):
        series = temp_dir / "series.txt"
        result = cli_runner.invoke(cli, ["simulate-expar", "--count", "60", "--out", str(series)])
        assert result.exit_code == 0, result.output
        values = [float(line) for line in series.read_text().splitlines()]
        assert len(values) == 60
        assert values[:2] == [2.75, 3.1]
        assert values[2] == pytest.approx(3.371, abs=1e-3)

        report = invoke_report(cli_runner, temp_dir, ["fit-tac", "--model", "expar", "--points", "3", str(series)])
        assert report["n"] == 58
        assert set(report["model"]) == {"pattern", "gamma", "z1", "z2", "c0", "c1", "pi1", "c2", "pi2"}

    def test_expar_divergence(self, cli_runner, temp_dir):
        args = ["simulate-expar", "--c0", "0", "--c1", "3", "--c2", "0", "--pi1", "0", "--pi2", "0"]
        args += ["--x1", "1", "--x2", "1"]
        result = cli_runner.invoke(cli, [*args, "--out", str(temp_dir / "s.txt")])
        assert result.exit_code == 3


class TestSeparableCommand:
    def test_exponential_pattern(self, cli_runner, temp_dir):
        data = temp_dir / "decay.csv"
        t = np.linspace(0.0, 5.0, 30)
        data.write_text(Dataset(t, 2.0 * np.exp(-0.5 * t) + 1.0).serialize())
        plot = temp_dir / "tac.csv"
        report = invoke_report(cli_runner, temp_dir, ["fit-tac", "--grid", "d=-1:0:11", "--plot", str(plot), str(data)])
        assert report["model"]["d"] == pytest.approx(-0.5, abs=1e-9)
        assert report["rss"] <= 1e-20
        assert np.loadtxt(plot, delimiter=",", skiprows=1).shape == (30, 8)

    def test_config_file(self, cli_runner, temp_dir, paradigm_file):
        config = temp_dir / "cfg.yaml"
        config.write_text(yaml.safe_dump({"tac": {"points": 3}}))
        result = cli_runner.invoke(cli, ["--config", str(config), "list-patterns"])
        assert result.exit_code == 0, result.output
        assert settings.tac.points == 3

    def test_list_patterns(self, cli_runner):
        result = cli_runner.invoke(cli, ["list-patterns"])
        assert result.exit_code == 0
        for name in ("demand", "expar", "exponential"):
            assert name in result.output

    def test_pattern_details(self, cli_runner):
        result = cli_runner.invoke(cli, ["list-patterns", "expar"])
        assert result.exit_code == 0, result.output
        assert "Pattern: expar v1.0.0" in result.output
        assert "Points per level: 25" in result.output

    def test_pattern_details_unknown_name(self, cli_runner):
        result = cli_runner.invoke(cli, ["list-patterns", "gompertz"])
        assert result.exit_code == 2

    def test_plain_output(self, cli_runner, temp_dir):
        config = temp_dir / "plain.yaml"
        config.write_text(yaml.safe_dump({"rich_output": False}))
        result = cli_runner.invoke(cli, ["--config", str(config), "list-patterns"])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert any(line.startswith("demand\t1.0.0\t") for line in lines)

    def test_verbose_from_config(self, cli_runner, temp_dir, paradigm_file):
        config = temp_dir / "verbose.yaml"
        config.write_text(yaml.safe_dump({"verbose_mode": True, "rich_output": False}))
        args = ["--config", str(config), "fit-minimax", str(paradigm_file), "--out", str(temp_dir / "r.json")]
        result = cli_runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert settings.verbose_mode is True
        assert "taxonomy: LimitNegInf" in result.output


class TestCommandLogging:
    def test_failing_command_logs_context_error(self, cli_runner, temp_dir, caplog):
        bad = temp_dir / "bad.csv"
        bad.write_text("0,1\n")
        caplog.set_level(logging.DEBUG)
        result = cli_runner.invoke(cli, ["fit-minimax", str(bad), "--out", str(temp_dir / "r.json")])
        assert result.exit_code == 2
        assert "Context error: fit-minimax" in [r.getMessage() for r in caplog.records]


class TestExitCodes:
    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_success(self, paradigm_file, temp_dir):
        assert run(["classify", str(paradigm_file), "--out", str(temp_dir / "c.json")]) == 0

    @pytest.mark.parametrize(
        "content",
        ["1,2\n1,3\n2,4\n", "0,1\n1,nan\n2,3\n", "0,1,2\n1,2,3\n", "0,1\n"],
    )
    def test_bad_input(self, temp_dir, content):
        path = temp_dir / "bad.csv"
        path.write_text(content)
        assert run(["fit-minimax", str(path), "--out", str(temp_dir / "r.json")]) == 2

    def test_quartet_needs_four_points(self, temp_dir):
        path = temp_dir / "three.csv"
        path.write_text("0,1\n1,0\n2,1\n")
        assert run(["fit-quartet", str(path), "--out", str(temp_dir / "r.json")]) == 2

    def test_unknown_pattern(self, paradigm_file, temp_dir):
        assert run(["fit-tac", "--model", "gompertz", str(paradigm_file), "--out", str(temp_dir / "r.json")]) == 2

    def test_unknown_grid_parameter(self, paradigm_file, temp_dir):
        assert run(["fit-tac", "--grid", "gamma=0:1", str(paradigm_file), "--out", str(temp_dir / "r.json")]) == 2

    def test_max_norm_is_a_usage_error(self, paradigm_file):
        assert run(["fit-tac", "--norm", "max", str(paradigm_file)]) == 2

    def test_unknown_command(self):
        assert run(["fit-everything"]) == 2

    def test_rank_deficient_grid_is_numerical(self, paradigm_file, temp_dir):
        args = ["fit-tac", "--grid", "d=1e-300:2e-300", str(paradigm_file), "--out", str(temp_dir / "r.json")]
        assert run(args) == 3

    def test_empty_rate_window_is_numerical(self, temp_dir):
        data = temp_dir / "cooling.csv"
        assert run(["simulate-cooling", "--out", str(data)]) == 0
        args = ["fit-minimax", "--k-min", "1", "--k-max", "0.001", str(data), "--out", str(temp_dir / "r.json")]
        assert run(args) == 3

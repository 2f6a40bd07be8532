import json
import math

import pytest
import typer
from typer.testing import CliRunner

from src.cli.main import app, main, parse_args
from src.cli.models import CommandName, OutputFormat, RunConfig
from src.core.settings import DEFAULT_MASTER_SEED

runner = CliRunner()


def test_parse_epsilon():
    config = parse_args(["epsilon", "--p", "1523", "--eps", "0.1", "--g", "948"])
    assert config.command is CommandName.EPSILON
    assert (config.p, config.eps, config.g) == (1523, 0.1, 948)
    assert config.master_seed == DEFAULT_MASTER_SEED
    assert config.format is OutputFormat.CSV


def test_parse_table1():
    config = parse_args(["table1", "--eps", "0.1", "--p-list", "1523,2689", "--trials", "5000", "--seed", "42"])
    assert config.p_list == [1523, 2689]
    assert config.trials == 5000
    assert config.master_seed == 42


def test_parse_global_options():
    config = parse_args(["--format", "json", "--threads", "4", "--precision", "full", "mingen", "--p", "1523", "--eps", "0.1"])
    assert config.format is OutputFormat.JSON
    assert config.threads == 4
    assert config.report_parameters() == {"p": 1523, "eps": 0.1, "master_seed": DEFAULT_MASTER_SEED}


def test_length_override_is_recorded():
    config = parse_args(["mingen", "--p", "5", "--eps", "0.5", "--d", "4"])
    assert config.overrides == ["d"]


@pytest.mark.parametrize(
    "argv,message",
    [
        (["epsilon", "--p", "1524", "--eps", "0.1", "--g", "948"], "p is not prime"),
        (["mingen", "--p", "1523", "--eps", "1.5"], "eps must lie strictly between 0 and 1"),
        (["epsilon", "--p", "7", "--eps", "0.5", "--g", "2"], "not a primitive root"),
        (["epsilon", "--p", "1523", "--eps", "0.1"], "missing required parameter"),
        (["frobnicate"], "No such command"),
    ],
)
def test_parse_errors_exit_with_one(argv, message, capsys):
    with pytest.raises(typer.Exit) as excinfo:
        parse_args(argv)
    assert excinfo.value.exit_code == 1
    assert message in capsys.readouterr().err


def test_run_config_splits_lists():
    config = RunConfig(command=CommandName.STATES, eps=0.1, p_list="1523, 2689")
    assert config.p_list == [1523, 2689]


def test_simulate_json(capsys):
    assert main(["--format", "json", "simulate", "--p", "5", "--ks", "1,2", "--j", "1"]) == 0
    document = json.loads(capsys.readouterr().out)
    (row,) = document["rows"]
    assert row["closed_form"] == pytest.approx(0.0625, abs=1e-9)
    assert abs(row["oracle"] - 0.0625) < 1e-9
    assert document["metadata"]["command"] == "simulate"
    assert document["metadata"]["seed"] == DEFAULT_MASTER_SEED
    assert document["metadata"]["parameters"]["ks"] == [1, 2]
    assert "elapsed_ms" not in document["metadata"]


def test_mingen_csv(capsys):
    assert main(["mingen", "--p", "1523", "--eps", "0.1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "p,eps,d,g_min,eps_g_min"
    assert lines[1].startswith("1523,0.1,161,624,0.0091")


def test_hypothesis_clean_pass(capsys):
    assert main(["hypothesis", "--p-max", "101", "--all-d"]) == 0
    assert capsys.readouterr().out == "p,g,d,j,cos_sum,threshold\n"


def test_reports_are_identical_across_threads(capsys):
    argv = ["table1", "--eps", "0.1", "--p-list", "1523", "--trials", "20"]
    assert main(["--threads", "1", *argv]) == 0
    single = capsys.readouterr().out
    assert main(["--threads", "4", *argv]) == 0
    assert capsys.readouterr().out == single
    assert single.startswith("p,eps,d,g,eps_rand,eps_g,")


def test_output_file(tmp_path):
    target = tmp_path / "states.csv"
    assert main(["--output", str(target), "states", "--eps", "0.1", "--p-list", "1523,9883"]) == 0
    header, *rows = [line.split(",") for line in target.read_text().splitlines()]
    assert header == ["p", "eps", "d", "d_unrounded", "qfa_states", "classical_states"]
    assert [row[:3] for row in rows] == [["1523", "0.1", "161"], ["9883", "0.1", "198"]]
    assert [row[4:] for row in rows] == [["322", "1523"], ["396", "9883"]]
    assert float(rows[0][3]) == pytest.approx(20 * math.log(2 * 1523), rel=1e-5)


def test_write_failure_exits_with_one(tmp_path, capsys):
    target = tmp_path / "missing" / "report.csv"
    assert main(["--output", str(target), "states", "--eps", "0.1", "--p-list", "1523"]) == 1
    assert "failed to write report" in capsys.readouterr().err


def test_runtime_errors_exit_with_one(capsys):
    assert main(["table2", "--p", "1523", "--eps", "0.1"]) == 1
    assert "no reference generator" in capsys.readouterr().err


def test_cli_runner_exit_codes():
    result = runner.invoke(app, ["epsilon", "--p", "1524", "--eps", "0.1", "--g", "948"])
    assert result.exit_code == 1
    result = runner.invoke(app, ["states", "--eps", "0.1", "--p-list", "1523"])
    assert result.exit_code == 0
    assert "1523,0.1,161," in result.output


def test_help_exits_with_zero(capsys):
    assert main(["--help"]) == 0
    assert "mingen" in capsys.readouterr().out


def test_command_help_exits_with_zero(capsys):
    assert main(["mingen", "--help"]) == 0
    assert "--eps" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv,message",
    [
        (["--bogus"], "No such option"),
        (["states", "--eps", "0.1", "--bogus"], "No such option"),
        (["frobnicate"], "No such command"),
    ],
)
def test_unknown_arguments_are_usage_errors(argv, message, capsys):
    assert main(argv) == 1
    assert message in capsys.readouterr().err


def test_cli_runner_unknown_option():
    result = runner.invoke(app, ["--bogus"])
    assert result.exit_code == 1
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0


def test_mingen_caps_length_below_p(capsys):
    assert main(["--format", "json", "mingen", "--p", "5", "--eps", "0.5"]) == 0
    document = json.loads(capsys.readouterr().out)
    (row,) = document["rows"]
    assert row["d"] == 4
    assert row["g_min"] in (2, 3)
    assert row["eps_g_min"] == pytest.approx(0.0625, abs=1e-6)
    assert document["metadata"]["overrides"] == ["d"]

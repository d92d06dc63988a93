import json
from pathlib import Path

import numpy as np
from typer.testing import CliRunner

import cli
from cli import app
from hamiltonian_learning.channels import ChannelBuildSpec, build_channel, load_superop
from hamiltonian_learning.harness.metrics import GammaFit
from hamiltonian_learning.harness.recipes import load_recipe
from hamiltonian_learning.harness.sweep import fit_dataset, read_dataset

RECIPES = Path(__file__).resolve().parent.parent / "recipes"

runner = CliRunner()

SWEEP_RECIPE = """\
name: tiny
trials: 2
base_seed: 4
base:
  family: {id: ising-line, n: 2}
  particles: 60
  experiments: 8
"""


def last_record(result) -> dict:
    for line in reversed(result.output.strip().splitlines()):
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            continue
        if isinstance(record, dict):
            return record
    raise AssertionError(f"no JSON record in output: {result.output!r}")


def test_missing_recipe_reports_usage_error(tmp_path):
    result = runner.invoke(app, ["run", "--config", str(tmp_path / "missing.yaml")])
    assert result.exit_code == 2
    record = last_record(result)
    assert record["error"] == "ConfigError" and record["exit_code"] == 2


def test_channel_build_then_noisy_run(tmp_path):
    channel_file = tmp_path / "noisy_swap.chan"
    recipe = RECIPES / "channels" / "noisy_swap.yaml"
    result = runner.invoke(app, ["channel-build", "--config", str(recipe), "--out", str(channel_file)])
    assert result.exit_code == 0, result.output
    assert last_record(result)["channel"] == str(channel_file)
    in_process = build_channel(load_recipe(recipe, ChannelBuildSpec))
    assert np.array_equal(load_superop(channel_file).matrix, in_process.matrix)

    run_recipe = tmp_path / "noisy_run.yaml"
    run_recipe.write_text(
        "family: {id: ising-line, n: 2}\nparticles: 50\nexperiments: 4\n"
        "noise: {channel_path: noisy_swap.chan, channel_role: swap-gate}\n"
    )
    result = runner.invoke(app, ["run", "--config", str(run_recipe), "--out", str(tmp_path / "out"), "--seed", "9"])
    assert result.exit_code == 0, result.output
    record = last_record(result)
    assert record["trace"] == str(tmp_path / "out" / "noisy_run" / "trace_9.json")
    trace = json.loads(Path(record["trace"]).read_text())
    assert len(trace["records"]) == 4 and trace["seed"] == 9


def test_sweep_is_deterministic_and_fit_gamma_matches(tmp_path):
    recipe = tmp_path / "tiny.yaml"
    recipe.write_text(SWEEP_RECIPE)
    for out in ("a", "b"):
        result = runner.invoke(app, ["sweep", "--config", str(recipe), "--out", str(tmp_path / out)])
        assert result.exit_code == 0, result.output
        assert last_record(result)["sweep"] == "tiny"
    dataset = tmp_path / "a" / "tiny" / "base.csv"
    assert dataset.read_bytes() == (tmp_path / "b" / "tiny" / "base.csv").read_bytes()

    result = runner.invoke(app, ["fit-gamma", str(dataset)])
    assert result.exit_code == 0, result.output
    assert GammaFit.model_validate(last_record(result)) == fit_dataset(read_dataset(dataset))

    result = runner.invoke(app, ["fit-gamma", str(dataset), "--first", "2", "--last", "6"])
    fit = GammaFit.model_validate(last_record(result))
    assert (fit.first, fit.last) == (2, 6)


def test_sweep_trial_override(tmp_path):
    recipe = tmp_path / "tiny.yaml"
    recipe.write_text(SWEEP_RECIPE)
    result = runner.invoke(app, ["sweep", "--config", str(recipe), "--out", str(tmp_path), "--trials", "1"])
    assert result.exit_code == 0, result.output
    assert read_dataset(tmp_path / "tiny" / "base.csv")["n_trials"].max() == 1


def test_fit_gamma_rejects_unknown_column(tmp_path):
    dataset = tmp_path / "losses.csv"
    dataset.write_text("experiment_index,median_loss\n1,0.5\n2,0.25\n")
    result = runner.invoke(app, ["fit-gamma", str(dataset), "--column", "q25"])
    assert result.exit_code == 2
    assert last_record(result)["error"] == "ConfigError"
    result = runner.invoke(app, ["fit-gamma", str(tmp_path / "missing.csv")])
    assert result.exit_code == 4


def test_modelselect_command(tmp_path):
    recipe = tmp_path / "ms.yaml"
    recipe.write_text(
        "name: ms\nexperiments: 5\ntrials: 2\n"
        "truth: {family: {id: ising-complete, n: 3}}\n"
        "null: {family: {id: ising-line, n: 3}, particles: 60}\n"
        "alt: {family: {id: ising-complete, n: 3}, particles: 60}\n"
    )
    result = runner.invoke(app, ["modelselect", "--config", str(recipe), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    record = last_record(result)
    assert record["modelselect"] == "ms"
    assert isinstance(record["final_median_log10_odds"], float)
    assert (tmp_path / "ms" / "odds.csv").is_file()


def test_run_with_the_shipped_single_trial_recipe(tmp_path):
    recipe = RECIPES / "runs" / "ising_line.yaml"
    result = runner.invoke(app, ["run", "--config", str(recipe), "--out", str(tmp_path), "--seed", "7"])
    assert result.exit_code == 0, result.output
    record = last_record(result)
    assert record["trace"] == str(tmp_path / "ising_line" / "trace_7.json")
    assert not record["aborted"]
    trace = json.loads(Path(record["trace"]).read_text())
    assert len(trace["records"]) == 50


def test_sweep_recipe_is_not_a_run_recipe(tmp_path):
    result = runner.invoke(app, ["run", "--config", str(RECIPES / "fig2.yaml"), "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert last_record(result)["error"] == "ConfigError"


def test_unexpected_errors_become_internal_error_records(tmp_path, monkeypatch):
    def broken_run(config):
        raise RuntimeError("worker crashed")

    monkeypatch.setattr(cli, "qhl_run", broken_run)
    recipe = RECIPES / "runs" / "ising_line.yaml"
    result = runner.invoke(app, ["run", "--config", str(recipe), "--out", str(tmp_path)])
    assert result.exit_code == 1
    record = last_record(result)
    assert record["error"] == "InternalError"
    assert record["message"] == "RuntimeError: worker crashed"

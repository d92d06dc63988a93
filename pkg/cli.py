"""
Command-line entry point.

    python cli.py run --config recipes/runs/ising_line.yaml --seed 7
    python cli.py sweep --config recipes/fig2.yaml --trials 50 --threads 8
    python cli.py modelselect --config recipes/fig7.yaml
    python cli.py channel-build --config recipes/channels/noisy_swap.yaml --out noisy_swap.chan
    python cli.py fit-gamma results/fig2/base.csv --first 5 --last 100

Failures print a JSON error record on stderr and exit with the error's code.
"""
import json
from functools import wraps
from pathlib import Path
from typing import Optional

import numpy as np
import typer

from config import settings
from logger import logger
from exceptions import EXIT_INTERNAL, ConfigError, QHLError
from hamiltonian_learning.channels import ChannelBuildSpec, build_channel, save_superop
from hamiltonian_learning.harness.recipes import load_recipe
from hamiltonian_learning.harness.sweep import (ModelSelectSpec, SweepSpec, fit_dataset, read_dataset,
                                                run_model_selection_sweep, run_sweep)
from hamiltonian_learning.protocols import QHLConfig, qhl_run
from hamiltonian_learning.storage import atomic_write_text

app = typer.Typer(help="Quantum Hamiltonian learning simulator", add_completion=False)

CONFIG_OPTION = typer.Option(..., "--config", help="Recipe file (YAML or JSON)")
OUT_OPTION = typer.Option(None, "--out", help="Output directory (default: QHL_OUTPUT_DIR)")
SEED_OPTION = typer.Option(None, "--seed", min=0, help="Overrides the recipe seed")
TRIALS_OPTION = typer.Option(None, "--trials", min=1, help="Overrides the recipe trial count")
THREADS_OPTION = typer.Option(None, "--threads", min=1, help="Worker count (default: QHL_THREADS)")


def handle_errors(command):
    """Turn errors into a JSON record on stderr; QHLError keeps its exit code, anything else exits 1."""
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except QHLError as e:
            logger.error(f"{command.__name__} failed: {e.message}")
            typer.echo(json.dumps(e.to_record(), default=str), err=True)
            raise typer.Exit(code=e.exit_code)
        except Exception as e:
            logger.exception(f"Unexpected error in {command.__name__}: {str(e)}")
            record = {"error": "InternalError", "message": f"{type(e).__name__}: {e}", "exit_code": EXIT_INTERNAL}
            typer.echo(json.dumps(record), err=True)
            raise typer.Exit(code=EXIT_INTERNAL)
    return wrapper


def _out_dir(out: Optional[Path]) -> Path:
    return out if out is not None else Path(settings.QHL_OUTPUT_DIR)


@app.command()
@handle_errors
def run(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Run one QHL trial and write its trace."""
    qhl_config = load_recipe(config, QHLConfig, seed=seed, threads=threads or settings.QHL_THREADS)
    trace = qhl_run(qhl_config)
    path = atomic_write_text(_out_dir(out) / config.stem / f"trace_{qhl_config.seed}.json",
                             trace.model_dump_json(indent=2) + "\n")
    final = trace.records[-1].loss if trace.records else float("nan")
    typer.echo(json.dumps({"trace": str(path), "final_loss": final, "aborted": trace.aborted}))


@app.command()
@handle_errors
def sweep(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Run a sweep of seeded trials and write median/IQR loss datasets."""
    spec = load_recipe(config, SweepSpec, base_seed=seed, trials=trials)
    result = run_sweep(spec, _out_dir(out), threads=threads or settings.QHL_THREADS)
    fits = {v.name: (v.fit.gamma if v.fit is not None else None) for v in result.variants}
    typer.echo(json.dumps({"sweep": spec.name, "out": str(_out_dir(out) / spec.name), "gamma": fits}))


@app.command()
@handle_errors
def modelselect(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Run null-vs-alternate model selection trials and write the log10 odds dataset."""
    spec = load_recipe(config, ModelSelectSpec, base_seed=seed, trials=trials)
    result = run_model_selection_sweep(spec, _out_dir(out), threads=threads or settings.QHL_THREADS)
    final = result.dataset["median_log10_odds"].iloc[-1]
    typer.echo(json.dumps({"modelselect": spec.name, "out": str(_out_dir(out) / spec.name),
                           "final_median_log10_odds": None if np.isnan(final) else float(final)}))


@app.command("channel-build")
@handle_errors
def channel_build(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", help="Channel file (default: QHL_OUTPUT_DIR/<recipe>.chan)"),
):
    """Build a gate channel from a Lindblad schedule and write the channel file."""
    spec = load_recipe(config, ChannelBuildSpec)
    path = save_superop(build_channel(spec), out or _out_dir(None) / f"{config.stem}.chan")
    typer.echo(json.dumps({"channel": str(path)}))


@app.command("fit-gamma")
@handle_errors
def fit_gamma_command(
    dataset: Path = typer.Argument(..., help="Sweep dataset CSV"),
    first: Optional[int] = typer.Option(None, "--first", min=1, help="First experiment index"),
    last: Optional[int] = typer.Option(None, "--last", min=1, help="Last experiment index"),
    column: str = typer.Option("median_loss", "--column", help="Loss column to fit"),
):
    """Fit loss ~ A exp(-gamma N) to a persisted sweep dataset."""
    frame = read_dataset(dataset)
    if column not in frame.columns or "experiment_index" not in frame.columns:
        raise ConfigError(f"Dataset {dataset} has no experiment_index/{column} columns", path=str(dataset))
    indices = frame["experiment_index"]
    fit_range = (first or int(indices.min()), last or int(indices.max()))
    typer.echo(fit_dataset(frame, fit_range, column).model_dump_json())


if __name__ == "__main__":
    app()

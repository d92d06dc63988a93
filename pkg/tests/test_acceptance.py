"""
Desk-scale runs of the shipped recipes. Each takes minutes; run with

    pytest -m slow
"""
from pathlib import Path

import numpy as np
import pytest

from config import settings
from hamiltonian_learning.harness.recipes import load_recipe
from hamiltonian_learning.harness.sweep import ModelSelectSpec, SweepSpec, run_model_selection_sweep, run_sweep

RECIPES = Path(__file__).resolve().parent.parent / "recipes"

pytestmark = pytest.mark.slow


def sweep(recipe: str, variants=None, **overrides):
    spec = load_recipe(RECIPES / recipe, SweepSpec, **overrides)
    if variants is not None:
        spec = spec.model_copy(update={"variants": [v for v in spec.variants if v.name in variants]})
    return {v.name: v for v in run_sweep(spec, threads=settings.QHL_THREADS).variants}


def median_at(variant, n: int) -> float:
    frame = variant.dataset
    return float(frame.loc[frame["experiment_index"] == n, "median_loss"].iloc[0])


def test_exponential_learning():
    result = sweep("fig2.yaml")["base"]
    assert median_at(result, 1) / median_at(result, 100) >= 1e5
    assert result.fit.gamma > 0.05


def test_depolarizing_slows_learning():
    results = sweep("fig5.yaml", variants={"noise_0", "noise_0.25", "noise_0.5"})
    gamma = {name: v.fit.gamma for name, v in results.items()}
    assert gamma["noise_0"] > gamma["noise_0.25"] > gamma["noise_0.5"]
    for name, strength in (("noise_0.25", 0.25), ("noise_0.5", 0.5)):
        ratio = gamma[name] / gamma["noise_0"]
        assert 0.5 * (1 - strength) <= ratio <= 1.5 * (1 - strength)


def test_learning_rate_falls_with_dimension():
    results = sweep("fig_dimension.yaml")
    assert results["d2"].fit.gamma > results["d3"].fit.gamma > results["d4"].fit.gamma


def test_misspecified_model_plateaus():
    result = sweep("fig_badmodel.yaml")["base"]
    at_100, at_200 = median_at(result, 100), median_at(result, 200)
    assert at_200 >= at_100 / 10
    assert 1e-9 <= at_200 <= 1e-5


def test_non_commuting_models_learn():
    ti = sweep("fig4.yaml", variants={"n2"})["n2"]
    assert median_at(ti, 100) <= median_at(ti, 1) / 1e3
    transverse = sweep("fig3.yaml", variants={"n2"})["n2"]
    assert median_at(transverse, 100) > median_at(ti, 100)


def test_model_selection_signs():
    complete_truth = run_model_selection_sweep(load_recipe(RECIPES / "fig7.yaml", ModelSelectSpec),
                                               threads=settings.QHL_THREADS).dataset
    odds = complete_truth["median_log10_odds"].to_numpy()
    assert odds[-1] > 5
    assert odds[-1] > odds[-51]

    line_truth = run_model_selection_sweep(load_recipe(RECIPES / "fig8.yaml", ModelSelectSpec),
                                           threads=settings.QHL_THREADS).dataset
    assert line_truth["median_log10_odds"].to_numpy()[-1] < 0
    assert np.all(line_truth["n_trials"] > 0)

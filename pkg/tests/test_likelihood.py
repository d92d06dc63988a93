import numpy as np
import pytest

from exceptions import DimensionMismatch, InvalidDesign, UnsupportedChannelError
from hamiltonian_learning.channels import depolarizing_superop, ideal_swap_superop, identity_superop, lambda_noise
from hamiltonian_learning.likelihood import (
    PSI0, PSI0_PERP, ExperimentDesign, InitialStateSpec, LikelihoodMode, NoiseConfig, OutcomeDatum,
    estimate_likelihoods, likelihood_error_bound, outcome_distribution, outcome_distributions,
    register_channel, sample_outcome,
)
from hamiltonian_learning.likelihood import simulator
from hamiltonian_learning.models import build_hamiltonian, hamiltonian_distance, sample_prior

NOISELESS = NoiseConfig()


def iqle(x_minus, t, clifford_seed=None, measurement="two-outcome"):
    state = (InitialStateSpec(kind="random-local-clifford", seed=clifford_seed)
             if clifford_seed is not None else InitialStateSpec())
    return ExperimentDesign(protocol="IQLE", t=t, x_minus=tuple(x_minus), initial_state=state,
                            measurement=measurement)


def test_design_validation(line2):
    with pytest.raises(ValueError):
        ExperimentDesign(protocol="IQLE", t=1.0)
    with pytest.raises(ValueError):
        ExperimentDesign(protocol="QLE", t=1.0, x_minus=(0.1,))
    with pytest.raises(ValueError):
        ExperimentDesign(protocol="QLE", t=0.0)
    with pytest.raises(ValueError):
        InitialStateSpec(kind="random-local-clifford")
    with pytest.raises(InvalidDesign):
        outcome_distribution([0.2], iqle([0.1, 0.2], 1.0), NOISELESS, line2)


@pytest.mark.parametrize("family_name", ["line2", "transverse2"])
def test_loschmidt_echo_returns_to_initial_state(family_name, request, rng):
    family = request.getfixturevalue(family_name)
    for seed in range(5):
        x = sample_prior(family, rng)
        for design in (iqle(x, 2.7), iqle(x, 0.4, clifford_seed=seed)):
            p = outcome_distribution(x, design, NOISELESS, family)
            assert p[PSI0] == pytest.approx(1.0, abs=1e-12)


def test_rows_are_distributions(transverse2, rng):
    xs = sample_prior(transverse2, rng, size=20)
    for measurement in ("two-outcome", "product-basis"):
        design = iqle(sample_prior(transverse2, rng), 1.3, clifford_seed=3, measurement=measurement)
        probabilities = outcome_distributions(xs, design, NOISELESS, transverse2)
        assert probabilities.shape == (20, design.outcome_count(2))
        assert np.all(probabilities >= 0)
        assert np.allclose(probabilities.sum(axis=1), 1.0, atol=1e-12)


def test_qle_product_basis_of_diagonal_model_keeps_populations(line2, rng):
    design = ExperimentDesign(protocol="QLE", t=3.1, measurement="product-basis")
    probabilities = outcome_distributions(sample_prior(line2, rng, size=10), design, NOISELESS, line2)
    assert np.allclose(probabilities, 0.25, atol=1e-12)


def test_single_coupling_iqle_closed_form(line2):
    # |+>|+> under exp(-i pi (x - x_minus) t / 2 ZZ): overlap cos^2(pi (x - x_minus) t / 2)
    x, x_minus, t = 0.31, 0.12, 2.0
    p = outcome_distribution([x], iqle([x_minus], t), NOISELESS, line2)
    assert p[PSI0] == pytest.approx(np.cos(np.pi * (x - x_minus) * t / 2) ** 2, abs=1e-12)
    assert p[PSI0_PERP] == pytest.approx(1.0 - p[PSI0], abs=1e-15)


def test_depolarized_likelihood_is_exact(transverse2):
    rng = np.random.default_rng(99)
    strength = 0.37
    noisy = NoiseConfig(depolarizing=strength)
    for index in range(100):
        x = sample_prior(transverse2, rng)
        design = iqle(sample_prior(transverse2, rng), rng.uniform(0.1, 5.0), clifford_seed=index)
        a = outcome_distribution(x, design, NOISELESS, transverse2)[PSI0]
        p = outcome_distribution(x, design, noisy, transverse2)
        assert p[PSI0] == pytest.approx(a * (1 - strength) + strength / 4, abs=1e-12)
        assert p[PSI0_PERP] == pytest.approx((1 - a) * (1 - strength) + strength * 3 / 4, abs=1e-12)


def test_fully_depolarized_product_basis_is_uniform(line2):
    design = iqle([0.1], 1.0, measurement="product-basis")
    p = outcome_distribution([0.4], design, NoiseConfig(depolarizing=1.0), line2)
    assert np.allclose(p, 0.25)


def test_echo_outcome_obeys_quadratic_error_bound(transverse2):
    rng = np.random.default_rng(2024)
    violations = 0
    for index in range(1000):
        x, x_tilde = sample_prior(transverse2, rng), sample_prior(transverse2, rng)
        distance = hamiltonian_distance(transverse2, x, x_tilde)
        t = rng.uniform(0.01, 1.0) / distance
        design = iqle(x_tilde, t, clifford_seed=index)
        delta = abs(outcome_distribution(x, design, NOISELESS, transverse2)[PSI0]
                    - outcome_distribution(x_tilde, design, NOISELESS, transverse2)[PSI0])
        bound = likelihood_error_bound(build_hamiltonian(transverse2, x), build_hamiltonian(transverse2, x_tilde), t)
        violations += delta > bound + 1e-12
    assert violations == 0


def test_any_outcome_obeys_first_order_error_bound(transverse2):
    rng = np.random.default_rng(77)
    for index in range(200):
        x, x_tilde = sample_prior(transverse2, rng), sample_prior(transverse2, rng)
        t = rng.uniform(0.01, 1.0) / hamiltonian_distance(transverse2, x, x_tilde)
        design = ExperimentDesign(protocol="QLE", t=t, measurement="product-basis",
                                  initial_state=InitialStateSpec(kind="random-local-clifford", seed=index))
        delta = np.abs(outcome_distribution(x, design, NOISELESS, transverse2)
                       - outcome_distribution(x_tilde, design, NOISELESS, transverse2))
        bound = likelihood_error_bound(build_hamiltonian(transverse2, x), build_hamiltonian(transverse2, x_tilde),
                                       t, outcome="any")
        assert np.all(delta <= bound + 1e-12)


def test_ideal_swap_noise_matches_noiseless(line2, transverse2, rng):
    noise = NoiseConfig(channel=lambda_noise(ideal_swap_superop()))
    for family in (line2, transverse2):
        xs = sample_prior(family, rng, size=8)
        design = iqle(sample_prior(family, rng), 1.7, clifford_seed=4)
        assert np.allclose(outcome_distributions(xs, design, noise, family),
                           outcome_distributions(xs, design, NOISELESS, family), atol=1e-10)


def test_register_channel_depolarizing_matches_closed_form(transverse2, rng):
    channel_noise = NoiseConfig(channel=depolarizing_superop(0.3, 2))
    xs = sample_prior(transverse2, rng, size=6)
    design = iqle(sample_prior(transverse2, rng), 0.9)
    assert np.allclose(outcome_distributions(xs, design, channel_noise, transverse2),
                       outcome_distributions(xs, design, NoiseConfig(depolarizing=0.3), transverse2), atol=1e-12)


def test_register_channel_shapes(line4):
    single = NoiseConfig(channel=identity_superop(2))
    assert register_channel(single, 2).shape == (16, 16)
    with pytest.raises(UnsupportedChannelError):
        register_channel(single, 3)
    with pytest.raises(DimensionMismatch):
        register_channel(NoiseConfig(channel=identity_superop(8)), 2)
    with pytest.raises(UnsupportedChannelError):
        outcome_distribution([0.1, 0.2, 0.3], iqle([0.1, 0.2, 0.3], 1.0), single, line4)


def test_channel_noise_needs_iqle(line2):
    noise = NoiseConfig(channel=identity_superop(2))
    with pytest.raises(InvalidDesign):
        outcome_distribution([0.1], ExperimentDesign(protocol="QLE", t=1.0), noise, line2)


def test_unknown_noise_is_not_modelled():
    noise = NoiseConfig(depolarizing=0.2, channel=identity_superop(2), assumed_known=False)
    modelled = noise.as_modelled()
    assert modelled.depolarizing == 0.0 and modelled.channel is None
    known = NoiseConfig(depolarizing=0.2)
    assert known.as_modelled() is known


def test_sample_outcome_frequencies(rng):
    draws = [sample_outcome(np.array([0.2, 0.8]), rng).outcome for _ in range(20000)]
    assert np.mean(draws) == pytest.approx(0.8, abs=0.01)
    assert sample_outcome(np.array([0.0, 1.0]), rng).outcome == 1
    assert sample_outcome(np.array([1.0, 0.0]), rng).outcome == 0
    rounded = np.array([0.25, 0.25, 0.5 + 1e-12, -1e-17])
    draws = np.array([sample_outcome(rounded, rng).outcome for _ in range(4000)])
    assert set(draws) <= {0, 1, 2}
    assert np.mean(draws == 2) == pytest.approx(0.5, abs=0.04)


def test_exact_likelihoods_do_not_depend_on_workers(line4, rng):
    particles = sample_prior(line4, rng, size=101)
    design = iqle(sample_prior(line4, rng), 4.0)
    datum = OutcomeDatum(outcome=PSI0_PERP)
    serial = estimate_likelihoods(particles, datum, design, NOISELESS, line4)
    threaded = estimate_likelihoods(particles, datum, design, NOISELESS, line4, n_jobs=4)
    assert np.array_equal(serial, threaded)
    assert np.array_equal(serial, outcome_distributions(particles, design, NOISELESS, line4)[:, PSI0_PERP])


def test_sampled_likelihoods(line2, rng):
    particles = sample_prior(line2, rng, size=300)
    design = iqle([0.05], 6.0)
    datum = OutcomeDatum(outcome=PSI0)
    mode = LikelihoodMode(mode="sampled", n_samples=160)
    first = estimate_likelihoods(particles, datum, design, NOISELESS, line2, mode, np.random.default_rng(8))
    second = estimate_likelihoods(particles, datum, design, NOISELESS, line2, mode, np.random.default_rng(8),
                                  n_jobs=3)
    assert np.array_equal(first, second)
    assert np.allclose(first * 160, np.round(first * 160))
    exact = estimate_likelihoods(particles, datum, design, NOISELESS, line2)
    assert np.mean(first - exact) == pytest.approx(0.0, abs=0.01)
    assert np.max(np.abs(first - exact)) < 6 * 0.5 / np.sqrt(160)

    with pytest.raises(InvalidDesign):
        estimate_likelihoods(particles, datum, design, NOISELESS, line2, mode)


def test_identical_particles_have_identical_likelihoods(transverse2):
    particles = np.tile([0.2, 0.4, 0.6], (5, 1))
    p = estimate_likelihoods(particles, OutcomeDatum(outcome=PSI0), iqle([0.1, 0.1, 0.1], 2.0),
                             NOISELESS, transverse2)
    assert np.all(p == p[0])


def test_invalid_outcome_rejected(line2):
    with pytest.raises(InvalidDesign):
        estimate_likelihoods(np.array([[0.1]]), OutcomeDatum(outcome=2), iqle([0.1], 1.0), NOISELESS, line2)


def test_global_phase_of_initial_state_is_unobservable(transverse2, rng, monkeypatch):
    xs = sample_prior(transverse2, rng, size=6)
    noisy = NoiseConfig(depolarizing=0.1, channel=depolarizing_superop(0.2, 1))
    designs = [iqle(sample_prior(transverse2, rng), 0.8, clifford_seed=4, measurement=m)
               for m in ("two-outcome", "product-basis")]
    baseline = [outcome_distributions(xs, d, noise, transverse2) for d in designs for noise in (NOISELESS, noisy)]

    unphased = simulator.initial_state
    monkeypatch.setattr(simulator, "initial_state", lambda design, n: np.exp(0.7j) * unphased(design, n))
    phased = [outcome_distributions(xs, d, noise, transverse2) for d in designs for noise in (NOISELESS, noisy)]
    for expected, actual in zip(baseline, phased):
        assert np.allclose(actual, expected, atol=1e-12)

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad
from scipy.stats import spearmanr

from src.domain.errors import BracketError, ContractError
from src.domain.models import CorrelationParams, pair_count, pair_indices
from src.domain.schemas import Bounds
from src.services.copula import (
    copula_cdf, copula_cdf_by_induction, copula_density, copula_density_by_induction, integrate_density, joint_cdf,
    joint_pdf, mixed_partial_fd, pair_kendall, pair_spearman, sample,
)
from src.services.marginal_net import normalized_cdf, normalized_pdf
from tests.factories import random_model, uniform_model


def test_pair_order_is_row_major_upper_triangular():
    assert pair_indices(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert pair_count(5) == 10


def test_independence_is_product_of_marginals():
    model = random_model(2, np.random.default_rng(0))
    model.correlations.raw[:] = 0.0
    y = np.array([0.3, 0.7])
    u = [normalized_cdf(m, v, b) for m, v, b in zip(model.marginals, y, model.bounds)]
    f = [normalized_pdf(m, v, b) for m, v, b in zip(model.marginals, y, model.bounds)]
    assert joint_cdf(model, y) == pytest.approx(u[0] * u[1], abs=1e-15)
    assert joint_pdf(model, y) == pytest.approx(f[0] * f[1], rel=1e-14)


def test_density_at_origin_for_linear_marginals():
    model = uniform_model(2, [0.5])
    assert joint_pdf(model, np.array([0.0, 0.0])) == pytest.approx(1.5, abs=1e-12)


def test_copula_density_corner_value():
    corr = CorrelationParams.from_effective(2, [0.3])
    assert copula_density(corr, np.array([0.0, 0.0])) == pytest.approx(1.3, abs=1e-12)
    assert copula_density(CorrelationParams(2, np.zeros(1)), np.array([0.2, 0.9])) == 1.0


def test_copula_density_rejects_points_outside_unit_cube():
    with pytest.raises(ContractError):
        copula_density(CorrelationParams(2, np.zeros(1)), np.array([1.2, 0.5]))


def test_dimension_mismatch_is_a_contract_error():
    with pytest.raises(ContractError):
        joint_cdf(uniform_model(3), np.array([0.5, 0.5]))


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_cdf_corners_and_faces(dim):
    rng = np.random.default_rng(dim)
    model = random_model(dim, rng)
    y = rng.uniform(model.lower, model.upper, size=(50, dim))
    for d in range(dim):
        face = y.copy()
        face[:, d] = model.lower[d]
        assert np.all(joint_cdf(model, face) == 0.0)
    assert joint_cdf(model, model.upper) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_margins_recover_normalized_cdf(dim):
    rng = np.random.default_rng(10 + dim)
    model = random_model(dim, rng)
    for d in range(dim):
        y = np.tile(model.upper, (20, 1))
        y[:, d] = rng.uniform(model.lower[d], model.upper[d], size=20)
        expected = normalized_cdf(model.marginals[d], y[:, d], model.bounds[d])
        np.testing.assert_allclose(joint_cdf(model, y), expected, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=100_000))
def test_joint_pdf_is_nonnegative(dim, seed):
    rng = np.random.default_rng(seed)
    model = random_model(dim, rng, raw_scale=1.5)
    y = rng.uniform(model.lower, model.upper, size=(100, dim))
    assert np.all(joint_pdf(model, y) >= 0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=100_000))
def test_cdf_is_coordinatewise_nondecreasing(dim, seed):
    rng = np.random.default_rng(seed)
    model = random_model(dim, rng)
    y = rng.uniform(model.lower, model.upper, size=dim)
    d = int(rng.integers(dim))
    moved = y.copy()
    moved[d] = rng.uniform(y[d], model.upper[d])
    low, high = joint_cdf(model, y), joint_cdf(model, moved)
    assert 0.0 <= low <= high + 1e-15 <= 1.0 + 1e-15


def test_copula_density_stays_within_zero_and_two():
    rng = np.random.default_rng(0)
    for dim in (2, 3, 6):
        corr = CorrelationParams(dim, rng.normal(0.0, 3.0, size=pair_count(dim)))
        c = copula_density(corr, rng.uniform(size=(20_000, dim)))
        assert c.min() >= 0.0 and c.max() <= 2.0


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_induction_matches_closed_forms(dim):
    rng = np.random.default_rng(dim)
    corr = CorrelationParams(dim, rng.normal(size=pair_count(dim)))
    u = rng.uniform(size=(200, dim))
    np.testing.assert_allclose(copula_cdf_by_induction(corr, u), copula_cdf(corr, u), atol=1e-12)
    np.testing.assert_allclose(copula_density_by_induction(corr, u), copula_density(corr, u), atol=1e-12)


def test_copula_density_matches_cdf_stencil_in_three_dimensions():
    rng = np.random.default_rng(7)
    corr = CorrelationParams(3, rng.normal(size=3))
    h = 1e-3
    for _ in range(20):
        u = rng.uniform(0.01, 0.99, size=3)
        total = 0.0
        for signs in product((-1.0, 1.0), repeat=3):
            s = np.array(signs)
            total += np.prod(s) * copula_cdf(corr, u + s * h)
        assert total / (2 * h) ** 3 == pytest.approx(copula_density(corr, u), abs=1e-5)


def test_fd_oracle_on_uniform_models():
    assert mixed_partial_fd(uniform_model(2), np.array([0.4, 0.6]), 1e-3) == pytest.approx(1.0, abs=1e-4)
    assert mixed_partial_fd(uniform_model(4), np.full(4, 0.5), 1e-2) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_fd_oracle_agrees_with_analytic_density(dim):
    rng = np.random.default_rng(100 + dim)
    for _ in range(10):
        model = random_model(dim, rng, raw_scale=0.5)
        width = model.upper - model.lower
        y = rng.uniform(model.lower + 0.05 * width, model.upper - 0.05 * width)
        analytic = joint_pdf(model, y)
        fd = mixed_partial_fd(model, y, 1e-3 * width)
        assert abs(fd - analytic) <= 1e-3 * max(analytic, 1e-2)


def test_fd_stencil_outside_box_is_a_bracket_error():
    with pytest.raises(BracketError):
        mixed_partial_fd(uniform_model(2), np.array([0.0005, 0.5]), 1e-3)


@pytest.mark.parametrize("dim,points", [(2, 64), (3, 32)])
def test_density_integrates_to_one(dim, points):
    rng = np.random.default_rng(dim)
    bounds = [Bounds(lower=-1.0, upper=2.0)] * dim
    model = random_model(dim, rng, raw_scale=0.5, bounds=bounds)
    assert integrate_density(model, points_per_dim=points + 1) == pytest.approx(1.0, abs=1e-3)


def test_monte_carlo_normalization_in_four_dimensions():
    model = random_model(4, np.random.default_rng(4), raw_scale=0.5)
    assert integrate_density(model, n_mc=1_000_000, seed=1) == pytest.approx(1.0, abs=5e-3)


def test_sampling_is_deterministic():
    model = random_model(3, np.random.default_rng(1))
    np.testing.assert_array_equal(sample(model, 50, seed=9), sample(model, 50, seed=9))


def test_uniform_sample_mean():
    n = 4000
    draws = sample(uniform_model(2), n, seed=0)
    assert draws.shape == (n, 2)
    assert np.all(np.abs(draws.mean(axis=0) - 0.5) <= 3.0 / np.sqrt(12 * n))


@pytest.mark.slow
def test_empirical_cdf_matches_joint_cdf():
    model = random_model(2, np.random.default_rng(2), raw_scale=0.5)
    n = 10_000
    draws = sample(model, n, seed=3)
    grid = np.stack(np.meshgrid(*[np.linspace(lo, hi, 20) for lo, hi in zip(model.lower, model.upper)]), axis=-1).reshape(-1, 2)
    empirical = np.array([np.mean(np.all(draws <= g, axis=1)) for g in grid])
    assert np.max(np.abs(empirical - joint_cdf(model, grid))) <= 1.6 / np.sqrt(n)


@pytest.mark.slow
def test_spearman_follows_pair_identity():
    c = 0.9
    draws = sample(uniform_model(2, [c]), 20_000, seed=5)
    rho = spearmanr(draws[:, 0], draws[:, 1])[0]
    assert rho == pytest.approx(pair_spearman(c), abs=0.05)


def test_pair_identities_match_numerical_integrals():
    c = 0.6
    corr = CorrelationParams.from_effective(2, [c])
    integral, _ = dblquad(lambda v, u: copula_cdf(corr, np.array([u, v])), 0.0, 1.0, 0.0, 1.0)
    assert 12.0 * integral - 3.0 == pytest.approx(pair_spearman(c), abs=1e-6)
    assert pair_kendall(c) == pytest.approx(2.0 * c / 9.0)

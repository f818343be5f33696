import numpy as np
import pytest

from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.models import MisoNetParams
from src.services.miso_diagnostic import (
    find_negative_witness, miso_forward, miso_grad, miso_mixed_partial, miso_mixed_partial_fd, random_miso_params,
    witness_params,
)
from src.usecases.diagnose_usecase import DiagnoseUseCase


def _params(seed, activation=Activation.SIGMOID, layer_sizes=(3, 4, 1)):
    rng = np.random.default_rng(seed)
    return random_miso_params(list(layer_sizes), [activation] * (len(layer_sizes) - 1), rng)


def test_forward_is_monotone_in_each_input():
    params = _params(0)
    y = np.array([0.2, -0.4, 1.0])
    for p in range(3):
        bumped = y.copy()
        bumped[p] += 0.5
        assert miso_forward(params, bumped) >= miso_forward(params, y)


def test_gradient_matches_finite_differences():
    params = _params(1, layer_sizes=(3, 5, 4, 1))
    y = np.array([0.3, 0.1, -0.7])
    h = 1e-5
    fd = [(miso_forward(params, y + h * e) - miso_forward(params, y - h * e)) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(miso_grad(params, y), fd, rtol=1e-6, atol=1e-9)
    assert np.all(miso_grad(params, y) >= 0.0)


def test_zero_parameter_net_at_the_origin():
    params = MisoNetParams([2, 1, 1], [np.zeros((1, 2)), np.zeros((1, 1))], [np.zeros(1), np.zeros(1)],
                           [Activation.SIGMOID, Activation.LINEAR])
    assert miso_forward(params, np.zeros(2)) == pytest.approx(np.log(2.0) * 0.5, abs=1e-5)


def test_gradient_is_positive_on_random_sigmoid_nets():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        params = random_miso_params([2, 4, 1], [Activation.SIGMOID] * 2, rng)
        assert np.all(miso_grad(params, rng.uniform(-3.0, 3.0, size=2)) > 0.0)


@pytest.mark.parametrize("activation", [Activation.SIGMOID, Activation.TANH])
def test_analytic_mixed_partial_matches_oracle_on_random_draws(activation):
    rng = np.random.default_rng(11)
    for _ in range(200):
        params = random_miso_params([3, 4, 1], [activation] * 2, rng)
        y = rng.uniform(-3.0, 3.0, size=3)
        p, q = (int(i) for i in rng.choice(3, size=2, replace=False))
        analytic = miso_mixed_partial(params, y, p, q)
        assert miso_mixed_partial_fd(params, y, p, q, h=1e-4) == pytest.approx(analytic, rel=1e-3, abs=1e-6)


@pytest.mark.parametrize("activation", [Activation.SIGMOID, Activation.TANH])
def test_analytic_mixed_partial_is_symmetric_and_matches_oracle(activation):
    params = _params(2, activation)
    y = np.array([0.5, -0.2, 0.1])
    value = miso_mixed_partial(params, y, 0, 2)
    assert value == pytest.approx(miso_mixed_partial(params, y, 2, 0), rel=1e-12, abs=1e-15)
    assert value == pytest.approx(miso_mixed_partial_fd(params, y, 0, 2, h=1e-4), rel=1e-4, abs=1e-7)


def test_linear_mixed_partial_is_zero():
    params = _params(3, Activation.LINEAR)
    assert miso_mixed_partial(params, np.array([0.1, 0.2, 0.3]), 0, 1) == 0.0


def test_analytic_form_requires_one_hidden_layer():
    with pytest.raises(ContractError):
        miso_mixed_partial(_params(4, layer_sizes=(2, 3, 3, 1)), np.zeros(2), 0, 1)
    with pytest.raises(ContractError):
        miso_mixed_partial(_params(4, layer_sizes=(2, 3, 1)), np.zeros(2), 1, 1)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("activation", [Activation.SIGMOID, Activation.TANH])
def test_saturating_activations_have_a_negative_witness(activation, seed):
    witness = find_negative_witness(activation, dim=2, seed=seed, max_trials=10_000)
    assert witness is not None
    assert witness.value < -1e-8
    params = witness_params(witness, activation)
    replay = miso_mixed_partial(params, np.array(witness.y), witness.p, witness.q)
    assert replay == pytest.approx(witness.value, rel=1e-6)
    assert miso_mixed_partial_fd(params, np.array(witness.y), witness.p, witness.q) < 0.0


def test_tanh_witness_in_three_dimensions():
    assert find_negative_witness(Activation.TANH, dim=3, seed=1, max_trials=10_000) is not None


def test_deeper_nets_use_the_finite_difference_oracle():
    witness = find_negative_witness(Activation.SIGMOID, dim=2, seed=0, max_trials=10_000, hidden_layers=2)
    assert witness is not None
    assert len(witness.layer_sizes) == 4


@pytest.mark.parametrize("activation", [Activation.LINEAR, Activation.RELU, Activation.EXPONENTIAL])
def test_no_witness_for_nonnegative_second_derivatives(activation):
    assert find_negative_witness(activation, dim=2, seed=0, max_trials=10_000) is None


def test_diagnose_report_messages():
    found = DiagnoseUseCase(Activation.SIGMOID, dim=2, seed=0, trials=10_000).run()
    assert found.witness is not None
    missing = DiagnoseUseCase(Activation.LINEAR, dim=2, seed=0, trials=500).run()
    assert missing.witness is None
    assert missing.message == "no witness in 500 trials"

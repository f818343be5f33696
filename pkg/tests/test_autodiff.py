import numpy as np
import pytest

from src.domain.activation import Activation
from src.services import autodiff as ad


def _numeric_grad(fn, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up, down = x.copy(), x.copy()
        up[idx] += h
        down[idx] -= h
        g[idx] = (fn(up) - fn(down)) / (2 * h)
    return g


def _tape_grad(build, x):
    leaf = ad.Tensor(x, requires_grad=True)
    out = ad.sum_(build(leaf))
    out.backward()
    return leaf.grad


@pytest.mark.parametrize("build", [
    lambda t: t * t + 3.0 * t,
    lambda t: (t - 1.0) / (t * t + 2.0),
    lambda t: ad.log(ad.softplus(t) + 1.0),
    lambda t: ad.tanh(t) * ad.softplus(-t),
    lambda t: ad.activate(Activation.SIGMOID, t) * ad.activate_d1(Activation.SIGMOID, t),
    lambda t: ad.activate_d1(Activation.TANH, t) - t[1:2] * t,
])
def test_elementwise_gradients(build):
    x = np.array([-1.3, 0.2, 0.9, 2.1])

    def value(arr):
        return float(np.sum(build(ad.Tensor(arr)).value))

    np.testing.assert_allclose(_tape_grad(build, x), _numeric_grad(value, x), rtol=1e-6, atol=1e-9)


def test_batched_matmul_with_broadcast_bias():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 3, 2))
    w = rng.normal(size=(5, 2, 4))
    b = rng.normal(size=(5, 1, 4))

    def build(t):
        return ad.tanh(ad.constant(a) @ t + ad.constant(b))

    def value(arr):
        return float(np.sum(np.tanh(a @ arr + b)))

    np.testing.assert_allclose(_tape_grad(build, w), _numeric_grad(value, w), rtol=1e-6, atol=1e-9)


def test_reshape_transpose_and_indexing():
    x = np.arange(12, dtype=float).reshape(3, 4) / 10.0

    def build(t):
        m = ad.transpose(ad.reshape(t, (3, 2, 2)))
        return m[:, 0, :] * ad.concat([t[:, 0:1], t[:, 3:4]], axis=-1)

    def value(arr):
        m = np.swapaxes(arr.reshape(3, 2, 2), -1, -2)
        return float(np.sum(m[:, 0, :] * np.concatenate([arr[:, 0:1], arr[:, 3:4]], axis=-1)))

    np.testing.assert_allclose(_tape_grad(build, x), _numeric_grad(value, x), rtol=1e-6, atol=1e-9)


def test_shared_subexpression_accumulates():
    leaf = ad.Tensor(np.array([2.0]), requires_grad=True)
    y = leaf * leaf
    out = ad.sum_(y + y * leaf)
    out.backward()
    # d/dx (x² + x³) = 2x + 3x²
    assert leaf.grad[0] == pytest.approx(2 * 2.0 + 3 * 4.0)


def test_constants_receive_no_gradient():
    c = ad.constant(np.ones(3))
    leaf = ad.Tensor(np.ones(3), requires_grad=True)
    ad.sum_(c * leaf).backward()
    assert c.grad is None
    np.testing.assert_array_equal(leaf.grad, np.ones(3))

"""
Red de pesos positivos con varias entradas y una salida (MISO).

Es monótona en cada coordenada, pero sus derivadas parciales mixtas pueden ser negativas
con activaciones sigmoid o tanh, así que no sirve como CDF conjunta. La búsqueda de testigos
encuentra parámetros y puntos concretos donde ocurre.
"""
import logging
from typing import List, Optional

import numpy as np

from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.models import MisoNetParams
from src.domain.schemas import Witness
from src.services.activations import act_d1, act_d2, act_eval
from src.services.marginal_net import positivity_map

logger = logging.getLogger(__name__)

WITNESS_THRESHOLD = -1e-8


def _points(params: MisoNetParams, y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.shape[-1:] != (params.input_dim,):
        raise ContractError(f"Se esperaban vectores de dimensión {params.input_dim}, forma {arr.shape}")
    return arr.reshape(-1, params.input_dim)


def miso_forward(params: MisoNetParams, y):
    """Y_k = z_k(w_k⁺·Y_{k-1} + b_k) hasta la salida escalar."""
    a = _points(params, y)
    with np.errstate(over="ignore", invalid="ignore"):
        for w_raw, b, kind in zip(params.raw_weights, params.biases, params.activations):
            a = act_eval(kind, a @ positivity_map(w_raw).T + b)
    out = a[:, 0]
    return float(out[0]) if np.ndim(y) == 1 else out


def miso_grad(params: MisoNetParams, y) -> np.ndarray:
    """Producto de los jacobianos por capa, diag(z'_k)·W_k⁺."""
    a = _points(params, y)
    if a.shape[0] != 1:
        raise ContractError("miso_grad evalúa un único punto")
    a = a[0]
    jac = np.eye(params.input_dim)
    for w_raw, b, kind in zip(params.raw_weights, params.biases, params.activations):
        w = positivity_map(w_raw)
        h = w @ a + b
        jac = (act_d1(kind, h)[:, None] * w) @ jac
        a = act_eval(kind, h)
    return jac[0]


def miso_mixed_partial(params: MisoNetParams, y, p: int, q: int) -> float:
    """
    ∂²Γ/∂y_p∂y_q analítica para una capa oculta:
    z2'(s)·Σ_l w2_l z1''(a_l) W1_lp W1_lq + z2''(s)·g_p·g_q, con g_p = Σ_l w2_l z1'(a_l) W1_lp.
    """
    if params.depth != 1:
        raise ContractError(f"La forma analítica requiere exactamente una capa oculta (hay {params.depth})")
    if p == q or not (0 <= p < params.input_dim and 0 <= q < params.input_dim):
        raise ContractError(f"Índices inválidos p={p}, q={q}")
    pt = _points(params, y)[0]
    w1, w2 = positivity_map(params.raw_weights[0]), positivity_map(params.raw_weights[1])[0]
    z1, z2 = params.activations
    a = w1 @ pt + params.biases[0]
    s = float(w2 @ act_eval(z1, a) + params.biases[1][0])
    slope = w2 * act_d1(z1, a)
    g_p = float(slope @ w1[:, p])
    g_q = float(slope @ w1[:, q])
    curvature = float(np.sum(w2 * act_d2(z1, a) * (w1[:, p] * w1[:, q])))
    return act_d1(z2, s) * curvature + act_d2(z2, s) * (g_p * g_q)


def miso_mixed_partial_fd(params: MisoNetParams, y, p: int, q: int, h: float = 1e-4) -> float:
    """Oráculo de cuatro puntos para cualquier profundidad."""
    pt = _points(params, y)[0]
    e_p = np.zeros_like(pt)
    e_q = np.zeros_like(pt)
    e_p[p] = h
    e_q[q] = h
    stencil = np.stack([pt + e_p + e_q, pt + e_p - e_q, pt - e_p + e_q, pt - e_p - e_q])
    f = np.asarray(miso_forward(params, stencil))
    return float((f[0] - f[1] - f[2] + f[3]) / (4.0 * h * h))


def random_miso_params(layer_sizes: List[int], activations: List[Activation], rng: np.random.Generator) -> MisoNetParams:
    weights = [rng.normal(size=(n_out, n_in)) for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:])]
    biases = [rng.normal(size=n_out) for n_out in layer_sizes[1:]]
    return MisoNetParams(list(layer_sizes), weights, biases, list(activations))


def find_negative_witness(activation: Activation, dim: int = 2, seed: int = 0, max_trials: int = 10_000,
                          hidden: int = 4, hidden_layers: int = 1) -> Optional[Witness]:
    """
    Búsqueda aleatoria reproducible de (parámetros, y, p, q) con derivada mixta < -1e-8.
    Devuelve None si se agotan los intentos.
    """
    if dim < 2:
        raise ContractError("Se requieren al menos dos entradas")
    rng = np.random.default_rng(seed)
    layer_sizes = [dim] + [hidden] * hidden_layers + [1]
    activations = [activation] * (hidden_layers + 1)
    for trial in range(1, max_trials + 1):
        params = random_miso_params(layer_sizes, activations, rng)
        y = rng.uniform(-3.0, 3.0, size=dim)
        p, q = (int(i) for i in rng.choice(dim, size=2, replace=False))
        with np.errstate(over="ignore", invalid="ignore"):
            if hidden_layers == 1:
                value = miso_mixed_partial(params, y, p, q)
            else:
                value = miso_mixed_partial_fd(params, y, p, q)
        if np.isfinite(value) and value < WITNESS_THRESHOLD:
            logger.info("Testigo negativo encontrado en el intento %d (valor %.3e)", trial, value)
            return Witness(
                layer_sizes=layer_sizes,
                effective_weights=[positivity_map(w).tolist() for w in params.raw_weights],
                biases=[b.tolist() for b in params.biases],
                y=y.tolist(),
                p=p,
                q=q,
                value=float(value),
                trial=trial,
            )
    logger.info("Sin testigo tras %d intentos (%s)", max_trials, activation.value)
    return None


def witness_params(witness: Witness, activation: Activation) -> MisoNetParams:
    """Reconstruye la red de un testigo (los pesos crudos se recuperan invirtiendo softplus)."""
    raw = [np.log(np.expm1(np.asarray(w) - 1e-6)) for w in witness.effective_weights]
    biases = [np.asarray(b) for b in witness.biases]
    return MisoNetParams(witness.layer_sizes, raw, biases, [activation] * (len(witness.layer_sizes) - 1))

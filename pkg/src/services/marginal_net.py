"""
Red monótona de una entrada que produce la CDF marginal normalizada sobre [L, U].
"""
from typing import List, Tuple

import numpy as np

from src.domain.activation import Activation
from src.domain.errors import ContractError, DegenerateMarginalError, EvaluationError, InversionError
from src.domain.models import MarginalNetParams, marginal_raw_count
from src.domain.schemas import Bounds
from src.services.activations import act_d1, act_eval

EPS_W = 1e-6
EPS_N = 1e-12
INVERSE_TOL = 1e-10
INVERSE_MAX_ITER = 200


def positivity_map(raw):
    """softplus(raw) + EPS_W: suave, estrictamente creciente y siempre > 0."""
    out = np.logaddexp(0.0, np.asarray(raw, dtype=float)) + EPS_W
    return float(out) if np.ndim(raw) == 0 else out


def effective_weights(params: MarginalNetParams) -> List[np.ndarray]:
    return [positivity_map(w) for w in params.raw_weights]


def _forward_with_derivative(params: MarginalNetParams, y) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise ContractError("La entrada de la red marginal debe ser finita")
    a = ((y - params.input_shift) / params.input_scale)[:, None]
    da = np.full_like(a, 1.0 / params.input_scale)
    n_layers = len(params.raw_weights)
    with np.errstate(over="ignore", invalid="ignore"):
        for k, (w_raw, b) in enumerate(zip(params.raw_weights, params.biases)):
            w = positivity_map(w_raw)
            h = a @ w.T + b
            dh = da @ w.T
            if not np.all(np.isfinite(h)):
                raise EvaluationError("Desbordamiento en la red marginal", layer=k)
            if k < n_layers - 1:
                a = act_eval(params.activation, h)
                da = act_d1(params.activation, h) * dh
            else:
                a, da = h, dh
            if not np.all(np.isfinite(a)):
                raise EvaluationError("Desbordamiento en la red marginal", layer=k)
    return a[:, 0], da[:, 0]


def _shape_like(values: np.ndarray, y):
    return float(values[0]) if np.ndim(y) == 0 else values.reshape(np.shape(y))


def forward(params: MarginalNetParams, y):
    """Ψ(y): no decreciente en y."""
    psi, _ = _forward_with_derivative(params, y)
    return _shape_like(psi, y)


def d_forward(params: MarginalNetParams, y):
    """dΨ/dy por regla de la cadena capa a capa; siempre >= 0."""
    _, dpsi = _forward_with_derivative(params, y)
    return _shape_like(dpsi, y)


def _endpoints(params: MarginalNetParams, b: Bounds) -> Tuple[float, float]:
    psi, _ = _forward_with_derivative(params, np.array([b.lower, b.upper]))
    denom = float(psi[1] - psi[0])
    if not denom >= EPS_N:
        raise DegenerateMarginalError(denom)
    return float(psi[0]), denom


def _cdf_values(params: MarginalNetParams, y: np.ndarray, b: Bounds, psi_lower: float, denom: float) -> np.ndarray:
    yc = np.clip(y, b.lower, b.upper)
    psi, _ = _forward_with_derivative(params, yc)
    u = np.clip((psi - psi_lower) / denom, 0.0, 1.0)
    return np.where(yc <= b.lower, 0.0, np.where(yc >= b.upper, 1.0, u))


def normalized_cdf(params: MarginalNetParams, y, b: Bounds):
    """
    (Ψ(y) - Ψ(L)) / (Ψ(U) - Ψ(L)), exactamente 0 en L y 1 en U.
    Fuera de [L, U] se recorta a 0/1.
    """
    psi_lower, denom = _endpoints(params, b)
    values = _cdf_values(params, np.asarray(y, dtype=float).reshape(-1), b, psi_lower, denom)
    return _shape_like(values, y)


def normalized_pdf(params: MarginalNetParams, y, b: Bounds):
    """Densidad marginal dΨ(y) / (Ψ(U) - Ψ(L)); 0 fuera del soporte."""
    _, denom = _endpoints(params, b)
    yf = np.asarray(y, dtype=float).reshape(-1)
    inside = (yf >= b.lower) & (yf <= b.upper)
    _, dpsi = _forward_with_derivative(params, np.clip(yf, b.lower, b.upper))
    return _shape_like(np.where(inside, dpsi / denom, 0.0), y)


def cdf_and_pdf(params: MarginalNetParams, y, b: Bounds) -> Tuple[np.ndarray, np.ndarray]:
    """CDF y densidad normalizadas en una sola pasada (para el evaluador conjunto)."""
    psi_lower, denom = _endpoints(params, b)
    yf = np.asarray(y, dtype=float).reshape(-1)
    yc = np.clip(yf, b.lower, b.upper)
    psi, dpsi = _forward_with_derivative(params, yc)
    u = np.clip((psi - psi_lower) / denom, 0.0, 1.0)
    u = np.where(yc <= b.lower, 0.0, np.where(yc >= b.upper, 1.0, u))
    inside = (yf >= b.lower) & (yf <= b.upper)
    return u, np.where(inside, dpsi / denom, 0.0)


def inverse_cdf(params: MarginalNetParams, p, b: Bounds):
    """
    y* con |normalized_cdf(y*) - p| <= 1e-10 por bisección sobre [L, U].
    """
    pf = np.asarray(p, dtype=float).reshape(-1)
    if np.any(~np.isfinite(pf)) or np.any((pf < 0.0) | (pf > 1.0)):
        raise ContractError("p debe estar en [0, 1]")
    psi_lower, denom = _endpoints(params, b)
    lo = np.full_like(pf, b.lower)
    hi = np.full_like(pf, b.upper)
    for _ in range(INVERSE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        below = _cdf_values(params, mid, b, psi_lower, denom) < pf
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= np.spacing(np.maximum(np.abs(lo), np.abs(hi)))):
            break
    err_lo = np.abs(_cdf_values(params, lo, b, psi_lower, denom) - pf)
    err_hi = np.abs(_cdf_values(params, hi, b, psi_lower, denom) - pf)
    y = np.where(err_lo <= err_hi, lo, hi)
    err = np.minimum(err_lo, err_hi)
    y = np.where(pf == 0.0, b.lower, np.where(pf == 1.0, b.upper, y))
    err = np.where((pf == 0.0) | (pf == 1.0), 0.0, err)
    failed = np.flatnonzero(err > INVERSE_TOL)
    if failed.size:
        i = failed[0]
        raise InversionError(float(pf[i]), float(lo[i]), float(hi[i]))
    return _shape_like(y, p)


def raw_count(layer_sizes: List[int]) -> int:
    return marginal_raw_count(layer_sizes)


def flatten_marginal(params: MarginalNetParams) -> np.ndarray:
    """Pesos capa a capa (por filas) y luego sesgos capa a capa."""
    parts = [w.reshape(-1) for w in params.raw_weights] + [b.reshape(-1) for b in params.biases]
    return np.concatenate(parts)


def unflatten_marginal(vec: np.ndarray, layer_sizes: List[int], activation: Activation,
                       input_shift: float = 0.0, input_scale: float = 1.0) -> MarginalNetParams:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (raw_count(layer_sizes),):
        raise ContractError(f"Se esperaban {raw_count(layer_sizes)} parámetros marginales, hay {vec.size}")
    weights, biases, pos = [], [], 0
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(vec[pos:pos + n_in * n_out].reshape(n_out, n_in).copy())
        pos += n_in * n_out
    for n_out in layer_sizes[1:]:
        biases.append(vec[pos:pos + n_out].copy())
        pos += n_out
    return MarginalNetParams(list(layer_sizes), weights, biases, activation, input_shift, input_scale)


def init_marginal_params(layer_sizes: List[int], activation: Activation, rng: np.random.Generator,
                         weight_scale: float = 0.1, bias_spread: float = 2.0) -> MarginalNetParams:
    """
    Pesos crudos pequeños (efectivos cerca de ln 2) y sesgos de la primera capa repartidos
    en [-bias_spread, bias_spread] para cubrir el soporte estandarizado [-1, 1].
    """
    weights, biases = [], []
    for k, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        weights.append(rng.normal(0.0, weight_scale, size=(n_out, n_in)))
        if k == 0:
            biases.append(rng.uniform(-bias_spread, bias_spread, size=n_out))
        else:
            biases.append(rng.normal(0.0, weight_scale, size=n_out))
    return MarginalNetParams(list(layer_sizes), weights, biases, activation)

"""
Verosimilitud negativa de la densidad compuesta y su gradiente exacto en modo reverso.

Cadena: hiperred -> softplus+ε -> red marginal -> normalización -> densidad de cópula -> log.
El lote se divide en fragmentos de tamaño fijo que pueden evaluarse en paralelo; las pérdidas
y gradientes se reducen en el orden de los fragmentos.
"""
import logging
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.domain.dataset import as_feature_matrix
from src.domain.errors import ContractError, DegenerateMarginalError, NonFiniteGradientError, NonFiniteLossError
from src.domain.models import ConditioningNet, pair_indices
from src.domain.schemas import ArchitectureDescriptor
from src.infra.workers import ordered_map
from src.services import autodiff as ad
from src.services.hypernet import nfn_forward_tensor, segment_sizes
from src.services.marginal_net import EPS_N, EPS_W

logger = logging.getLogger(__name__)

EPS_LL = 1e-12
DEFAULT_CHUNK = 32

Batch = Tuple[np.ndarray, np.ndarray]


def as_batch(pairs: Sequence[Tuple[Sequence[float], Sequence[float]]]) -> Batch:
    """Convierte una lista de pares (x, y) en matrices (X, Y)."""
    if not pairs:
        raise ContractError("El lote está vacío")
    xs = np.array([np.asarray(x, dtype=float).reshape(-1) for x, _ in pairs], dtype=float)
    ys = np.array([np.asarray(y, dtype=float).reshape(-1) for _, y in pairs], dtype=float)
    return as_feature_matrix(xs, len(pairs)), ys


def _check_batch(arch: ArchitectureDescriptor, batch: Batch) -> Batch:
    xs, ys = np.asarray(batch[0], dtype=float), np.asarray(batch[1], dtype=float)
    if ys.ndim != 2 or ys.shape[0] == 0:
        raise ContractError("El lote está vacío")
    if ys.shape[1] != arch.dim:
        raise ContractError(f"Objetivos de dimensión {ys.shape[1]}, se esperaba {arch.dim}")
    if arch.bounds is None:
        raise ContractError("La arquitectura no tiene cotas")
    lower = np.array([b.lower for b in arch.bounds])
    upper = np.array([b.upper for b in arch.bounds])
    outside = np.flatnonzero(np.any((ys < lower) | (ys > upper), axis=1))
    if outside.size:
        raise ContractError(f"La muestra {outside[0]} está fuera de las cotas")
    return as_feature_matrix(xs, ys.shape[0]), ys


def _marginal_terms(raw: ad.Tensor, pos: int, layer_sizes: List[int], activation, y: np.ndarray,
                    lower: float, upper: float, dim: int) -> Tuple[ad.Tensor, ad.Tensor]:
    n = y.shape[0]
    shift, scale = 0.5 * (lower + upper), 0.5 * (upper - lower)
    weights = []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        block = ad.reshape(raw[:, pos:pos + n_in * n_out], (n, n_out, n_in))
        weights.append(ad.transpose(ad.softplus(block) + EPS_W))
        pos += n_in * n_out
    biases = []
    for n_out in layer_sizes[1:]:
        biases.append(ad.reshape(raw[:, pos:pos + n_out], (n, 1, n_out)))
        pos += n_out
    points = np.stack([(y - shift) / scale, np.full(n, (lower - shift) / scale), np.full(n, (upper - shift) / scale)], axis=1)
    a = ad.constant(points[:, :, None])
    da = ad.constant(np.full((n, 1, 1), 1.0 / scale))
    n_layers = len(weights)
    for k, (w, b) in enumerate(zip(weights, biases)):
        h = a @ w + b
        dh = da @ w
        if k < n_layers - 1:
            a = ad.activate(activation, h)
            da = ad.activate_d1(activation, h[:, 0:1, :]) * dh
        else:
            a, da = h, dh
    psi_y, psi_lower, psi_upper = a[:, 0, 0], a[:, 1, 0], a[:, 2, 0]
    denom = psi_upper - psi_lower
    bad = np.flatnonzero(~(denom.value >= EPS_N))
    if bad.size:
        raise DegenerateMarginalError(float(denom.value[bad[0]]), dim=dim)
    return (psi_y - psi_lower) / denom, da[:, 0, 0] / denom


def sample_losses(net: ConditioningNet, params: Sequence[ad.Tensor], arch: ArchitectureDescriptor,
                  xs: np.ndarray, ys: np.ndarray) -> ad.Tensor:
    """-log(joint_pdf + ε) por muestra, como Tensor de forma (n,)."""
    raw = nfn_forward_tensor(net, params, xs)
    if raw.shape[0] != ys.shape[0]:
        raw = ad.broadcast_to(raw, (ys.shape[0], raw.shape[-1]))
    cdfs, pdfs, pos = [], [], 0
    sizes = segment_sizes(arch)
    for d in range(arch.dim):
        b = arch.bounds[d]
        u, pdf = _marginal_terms(raw, pos, arch.marginal_layer_sizes(d), arch.marginals[d].activation,
                                 ys[:, d], b.lower, b.upper, d)
        cdfs.append(u)
        pdfs.append(pdf)
        pos += sizes[d]
    total = None
    for k, (d, i) in enumerate(pair_indices(arch.dim)):
        term = ad.tanh(raw[:, pos + k]) * (1.0 - 2.0 * cdfs[d]) * (1.0 - 2.0 * cdfs[i])
        total = term if total is None else total + term
    copula = 1.0 + total / comb(arch.dim, 2)
    joint = copula * ad.prod_list(pdfs)
    return -ad.log(joint + EPS_LL)


def _chunk_eval(net: ConditioningNet, arch: ArchitectureDescriptor, xs: np.ndarray, ys: np.ndarray,
                offset: int, with_grad: bool) -> Tuple[float, Optional[List[np.ndarray]]]:
    params = [ad.Tensor(p, requires_grad=with_grad) for p in net.parameters()]
    losses = sample_losses(net, params, arch, xs, ys)
    bad = np.flatnonzero(~np.isfinite(losses.value))
    if bad.size:
        raise NonFiniteLossError(offset + int(bad[0]), float(losses.value[bad[0]]))
    total = ad.sum_(losses)
    if not with_grad:
        return float(total.value), None
    total.backward()
    grads = [p.grad if p.grad is not None else np.zeros_like(p.value) for p in params]
    return float(total.value), grads


def _chunks(n: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def loss_and_grad(net: ConditioningNet, arch: ArchitectureDescriptor, batch: Batch,
                  chunk_size: int = DEFAULT_CHUNK, with_grad: bool = True) -> Tuple[float, Optional[List[np.ndarray]]]:
    xs, ys = _check_batch(arch, batch)
    n = ys.shape[0]
    results = ordered_map(
        lambda span: _chunk_eval(net, arch, xs[span[0]:span[1]], ys[span[0]:span[1]], span[0], with_grad),
        _chunks(n, chunk_size),
    )
    loss = 0.0
    grads: Optional[List[np.ndarray]] = None
    for chunk_loss, chunk_grads in results:
        loss += chunk_loss
        if chunk_grads is not None:
            grads = [g.copy() for g in chunk_grads] if grads is None else [a + b for a, b in zip(grads, chunk_grads)]
    loss /= n
    if grads is not None:
        grads = [g / n for g in grads]
        if not all(np.all(np.isfinite(g)) for g in grads):
            raise NonFiniteGradientError("Gradiente no finito")
    return loss, grads


def nll_loss(net: ConditioningNet, arch: ArchitectureDescriptor, batch: Batch, chunk_size: int = DEFAULT_CHUNK) -> float:
    """Media de -log(joint_pdf(materialize(nfn_forward(x)), y) + 1e-12) sobre el lote."""
    loss, _ = loss_and_grad(net, arch, batch, chunk_size, with_grad=False)
    return loss


def grad(net: ConditioningNet, arch: ArchitectureDescriptor, batch: Batch, chunk_size: int = DEFAULT_CHUNK) -> List[np.ndarray]:
    """Gradiente exacto de nll_loss respecto de net.parameters(), en el mismo orden."""
    _, grads = loss_and_grad(net, arch, batch, chunk_size, with_grad=True)
    return grads


def flatten_arrays(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([a.reshape(-1) for a in arrays]) if arrays else np.zeros(0)


def unflatten_like(vec: np.ndarray, like: Sequence[np.ndarray]) -> List[np.ndarray]:
    out, pos = [], 0
    for a in like:
        out.append(vec[pos:pos + a.size].reshape(a.shape).copy())
        pos += a.size
    return out


def grad_check(net: ConditioningNet, arch: ArchitectureDescriptor, batch: Batch, h: float = 1e-5,
               max_coords: int = 256, seed: int = 0, floor: float = 1e-4) -> float:
    """
    Máximo error relativo entre grad y diferencias centrales de nll_loss.
    Se comparan todas las coordenadas o un subconjunto aleatorio de max_coords (>= 200 por defecto 256).
    Solo cuentan coordenadas con |g| > 1e-8; el denominador es max(|g|, |fd|, floor).
    """
    if h <= 0:
        raise ContractError("h debe ser positivo")
    base = net.parameters()
    theta = flatten_arrays(base)
    g = flatten_arrays(grad(net, arch, batch))
    coords = np.arange(theta.size)
    if theta.size > max_coords:
        coords = np.sort(np.random.default_rng(seed).choice(theta.size, size=max_coords, replace=False))
    worst = 0.0
    for j in coords:
        if abs(g[j]) <= 1e-8:
            continue
        bumped = theta.copy()
        bumped[j] = theta[j] + h
        f_plus = nll_loss(net.with_parameters(unflatten_like(bumped, base)), arch, batch)
        bumped[j] = theta[j] - h
        f_minus = nll_loss(net.with_parameters(unflatten_like(bumped, base)), arch, batch)
        fd = (f_plus - f_minus) / (2.0 * h)
        worst = max(worst, abs(g[j] - fd) / max(abs(g[j]), abs(fd), floor))
    logger.debug("grad_check sobre %d coordenadas: error relativo máximo %.3e", coords.size, worst)
    return worst

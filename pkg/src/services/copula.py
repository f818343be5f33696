"""
Combinador por pares: CDF conjunta, densidad de cópula en forma cerrada, densidad conjunta y muestreo.

CDF de la cópula:
    C(u) = ∏_d u_d · (1/binom(D,2)) · Σ_{d<i} [c_di (1-u_d)(1-u_i) + 1]
Densidad (derivada mixta de orden D):
    c(u) = 1 + (1/binom(D,2)) · Σ_{d<i} c_di (1-2u_d)(1-2u_i)  ∈ [0, 2]
"""
import logging
from itertools import product
from math import comb
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from src.domain.errors import BracketError, ContractError
from src.domain.models import CorrelationParams, JdanModel, pair_indices
from src.services.marginal_net import cdf_and_pdf, inverse_cdf, normalized_cdf

logger = logging.getLogger(__name__)

ENVELOPE = 2.0


def _as_points(values, dim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape[-1:] != (dim,):
        raise ContractError(f"Se esperaban vectores de dimensión {dim}, forma recibida {arr.shape}")
    return arr.reshape(-1, dim)


def _shape_like(values: np.ndarray, points):
    return float(values[0]) if np.ndim(points) == 1 else values.reshape(np.shape(points)[:-1])


def copula_cdf(corr: CorrelationParams, u) -> np.ndarray:
    pts = _as_points(u, corr.dim)
    bracket = np.zeros(pts.shape[0])
    for c, (d, i) in zip(corr.effective, pair_indices(corr.dim)):
        bracket += c * (1.0 - pts[:, d]) * (1.0 - pts[:, i]) + 1.0
    values = np.prod(pts, axis=1) * bracket / comb(corr.dim, 2)
    return _shape_like(values, u)


def copula_density(corr: CorrelationParams, u):
    pts = _as_points(u, corr.dim)
    if np.any((pts < 0.0) | (pts > 1.0)):
        raise ContractError("u debe estar en [0, 1]^D")
    total = np.zeros(pts.shape[0])
    for c, (d, i) in zip(corr.effective, pair_indices(corr.dim)):
        total += c * (1.0 - 2.0 * pts[:, d]) * (1.0 - 2.0 * pts[:, i])
    return _shape_like(1.0 + total / comb(corr.dim, 2), u)


def copula_cdf_by_induction(corr: CorrelationParams, u):
    """
    Reconstruye la CDF con la recursión D -> D+1:
    S_{m+1} = S_m·u_{m+1} + Σ_{d<=m} (∏_{i<=m, i≠d} u_i)·S^{d,m+1}.
    """
    pts = _as_points(u, corr.dim)
    coeff = {pair: c for pair, c in zip(pair_indices(corr.dim), corr.effective)}

    def pair_term(d, i):
        return pts[:, d] * pts[:, i] * (coeff[(d, i)] * (1.0 - pts[:, d]) * (1.0 - pts[:, i]) + 1.0)

    total = pair_term(0, 1)
    for m in range(2, corr.dim):
        cross = np.zeros(pts.shape[0])
        for d in range(m):
            others = np.prod(np.delete(pts[:, :m], d, axis=1), axis=1)
            cross += others * pair_term(d, m)
        total = total * pts[:, m] + cross
    return _shape_like(total / comb(corr.dim, 2), u)


def copula_density_by_induction(corr: CorrelationParams, u):
    """Misma recursión aplicada a la derivada mixta: c_{m+1} = c_m + Σ_{d<=m} c^{d,m+1}."""
    pts = _as_points(u, corr.dim)
    coeff = {pair: c for pair, c in zip(pair_indices(corr.dim), corr.effective)}

    def pair_density(d, i):
        return coeff[(d, i)] * (1.0 - 2.0 * pts[:, d]) * (1.0 - 2.0 * pts[:, i]) + 1.0

    total = pair_density(0, 1)
    for m in range(2, corr.dim):
        for d in range(m):
            total = total + pair_density(d, m)
    return _shape_like(total / comb(corr.dim, 2), u)


def _marginal_arrays(model: JdanModel, pts: np.ndarray):
    u = np.empty_like(pts)
    pdf = np.empty_like(pts)
    for d, (params, b) in enumerate(zip(model.marginals, model.bounds)):
        u[:, d], pdf[:, d] = cdf_and_pdf(params, pts[:, d], b)
    return u, pdf


def marginal_cdfs(model: JdanModel, y) -> np.ndarray:
    """Matriz de CDFs marginales normalizadas, una columna por dimensión."""
    pts = _as_points(y, model.dim)
    return np.column_stack([normalized_cdf(p, pts[:, d], b) for d, (p, b) in enumerate(zip(model.marginals, model.bounds))])


def joint_cdf(model: JdanModel, y):
    """CDF conjunta en [0, 1]; coordenadas fuera de las cotas se recortan."""
    pts = _as_points(y, model.dim)
    return _shape_like(np.asarray(copula_cdf(model.correlations, marginal_cdfs(model, pts))).reshape(-1), y)


def joint_pdf(model: JdanModel, y):
    """c(Ψ̄(y)) · ∏_d densidad marginal; no negativa para cualquier parámetro."""
    pts = _as_points(y, model.dim)
    u, pdf = _marginal_arrays(model, pts)
    c = np.asarray(copula_density(model.correlations, u)).reshape(-1)
    return _shape_like(c * np.prod(pdf, axis=1), y)


def mixed_partial_fd(model: JdanModel, y, h):
    """
    Estimación por diferencias centrales de ∂^D F / ∂y_1...∂y_D con el esténcil de 2^D puntos.
    """
    pts = _as_points(y, model.dim)
    step = np.broadcast_to(np.asarray(h, dtype=float), (model.dim,))
    if np.any(step <= 0):
        raise ContractError("El paso h debe ser positivo")
    if np.any(pts - step < model.lower) or np.any(pts + step > model.upper):
        raise BracketError("El esténcil sale de la caja de soporte: y debe distar al menos h de las cotas")
    total = np.zeros(pts.shape[0])
    for signs in product((-1.0, 1.0), repeat=model.dim):
        s = np.array(signs)
        weight = np.prod(s)
        total += weight * np.asarray(joint_cdf(model, pts + s * step)).reshape(-1)
    return _shape_like(total / np.prod(2.0 * step), y)


def sample_copula(corr: CorrelationParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Muestreo por rechazo de u ~ c(u) con envolvente constante 2."""
    accepted = []
    remaining = n
    while remaining > 0:
        batch = max(2 * remaining, 64)
        u = rng.uniform(size=(batch, corr.dim))
        keep = rng.uniform(size=batch) * ENVELOPE <= copula_density(corr, u)
        taken = u[keep][:remaining]
        accepted.append(taken)
        remaining -= taken.shape[0]
    return np.concatenate(accepted, axis=0)


def sample_with_rng(model: JdanModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ContractError("n debe ser >= 1")
    u = sample_copula(model.correlations, n, rng)
    return np.column_stack([
        inverse_cdf(params, u[:, d], b) for d, (params, b) in enumerate(zip(model.marginals, model.bounds))
    ])


def sample(model: JdanModel, n: int, seed: int) -> np.ndarray:
    """n muestras i.i.d. de la densidad conjunta; deterministas dada la semilla."""
    return sample_with_rng(model, n, np.random.default_rng(seed))


def pair_spearman(c: float) -> float:
    return c / 3.0


def pair_kendall(c: float) -> float:
    return 2.0 * c / 9.0


def integrate_density(model: JdanModel, points_per_dim: Optional[int] = None, n_mc: int = 1_000_000,
                      seed: int = 0, chunk: int = 100_000) -> float:
    """
    Integral de joint_pdf sobre la caja: Simpson tensorial para D <= 3, Monte Carlo para D >= 4.
    """
    lower, upper = model.lower, model.upper
    if model.dim <= 3:
        n = points_per_dim or (65 if model.dim == 2 else 33)
        grids = [np.linspace(lo, hi, n) for lo, hi in zip(lower, upper)]
        mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, model.dim)
        values = np.asarray(joint_pdf(model, mesh)).reshape((n,) * model.dim)
        for g in reversed(grids):
            values = simpson(values, x=g, axis=-1)
        return float(values)
    rng = np.random.default_rng(seed)
    volume = float(np.prod(upper - lower))
    total, done = 0.0, 0
    while done < n_mc:
        k = min(chunk, n_mc - done)
        pts = rng.uniform(lower, upper, size=(k, model.dim))
        total += float(np.sum(joint_pdf(model, pts)))
        done += k
    logger.debug("Integración Monte Carlo con %d puntos", n_mc)
    return volume * total / n_mc

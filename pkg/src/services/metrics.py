"""
Métricas de pronóstico probabilístico: log score, CRPS marginal, KS del PIT y energy score.
"""
import logging
from typing import List, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.spatial.distance import cdist
from scipy.stats import kstest

from src.domain.dataset import as_feature_matrix
from src.domain.density_protocol import ConditionalDensity
from src.domain.errors import ContractError
from src.domain.models import JdanModel
from src.domain.schemas import MetricsReport
from src.infra.workers import ordered_map
from src.services.copula import joint_pdf, sample_with_rng
from src.services.forecaster import StaticForecaster
from src.services.likelihood import EPS_LL
from src.services.marginal_net import normalized_cdf

logger = logging.getLogger(__name__)

CRPS_POINTS = 257


def _pairs(forecaster: ConditionalDensity, features, targets) -> Tuple[np.ndarray, np.ndarray]:
    ys = np.asarray(targets, dtype=float).reshape(-1, forecaster.dim)
    xs = as_feature_matrix(features, ys.shape[0])
    if ys.shape[0] == 0:
        raise ContractError("No hay pares para evaluar")
    return xs, ys


def _inside(model: JdanModel, y: np.ndarray) -> bool:
    return bool(np.all((y >= model.lower) & (y <= model.upper)))


def log_density_terms(forecaster: ConditionalDensity, features, targets) -> Tuple[np.ndarray, int]:
    """log(joint_pdf + ε) por par dentro de las cotas, y cuántos pares quedaron excluidos."""
    xs, ys = _pairs(forecaster, features, targets)
    if isinstance(forecaster, StaticForecaster):
        model = forecaster.model
        keep = np.all((ys >= model.lower) & (ys <= model.upper), axis=1)
        values = np.log(np.asarray(joint_pdf(model, ys[keep])).reshape(-1) + EPS_LL) if keep.any() else np.zeros(0)
        return values, int((~keep).sum())
    values, excluded = [], 0
    for x, y in zip(xs, ys):
        model = forecaster.model_for(x)
        if not _inside(model, y):
            excluded += 1
            continue
        values.append(np.log(joint_pdf(model, y) + EPS_LL))
    return np.asarray(values, dtype=float), excluded


def log_score(forecaster: ConditionalDensity, features, targets) -> float:
    """Media de log joint_pdf (mayor es mejor); igual a -nll_loss sobre el mismo lote."""
    values, excluded = log_density_terms(forecaster, features, targets)
    if excluded:
        logger.info("%d pares fuera de las cotas excluidos del log score", excluded)
    if values.size == 0:
        raise ContractError("Ningún par dentro de las cotas para el log score")
    return float(np.sum(values) / values.size)


def _crps_one(model: JdanModel, y: float, d: int) -> float:
    params, b = model.marginals[d], model.bounds[d]
    y = float(np.clip(y, b.lower, b.upper))
    left = np.linspace(b.lower, y, CRPS_POINTS)
    right = np.linspace(y, b.upper, CRPS_POINTS)
    f_left = np.asarray(normalized_cdf(params, left, b))
    f_right = np.asarray(normalized_cdf(params, right, b))
    return float(simpson(f_left ** 2, x=left) + simpson((1.0 - f_right) ** 2, x=right))


def crps_marginal(forecaster: ConditionalDensity, features, targets, d: int) -> float:
    """Media de ∫_L^U (F_d(t) - 1{t >= y_d})² dt."""
    xs, ys = _pairs(forecaster, features, targets)
    values = ordered_map(lambda i: _crps_one(forecaster.model_for(xs[i]), ys[i, d], d), range(ys.shape[0]))
    return float(np.mean(values))


def pit_values(forecaster: ConditionalDensity, features, targets, d: int) -> np.ndarray:
    xs, ys = _pairs(forecaster, features, targets)
    if isinstance(forecaster, StaticForecaster):
        m = forecaster.model
        return np.asarray(normalized_cdf(m.marginals[d], ys[:, d], m.bounds[d])).reshape(-1)
    out = []
    for x, y in zip(xs, ys):
        m = forecaster.model_for(x)
        out.append(normalized_cdf(m.marginals[d], y[d], m.bounds[d]))
    return np.asarray(out, dtype=float)


def pit_ks(forecaster: ConditionalDensity, features, targets, d: int) -> float:
    """Estadístico KS de los valores PIT frente a Uniforme(0, 1)."""
    u = pit_values(forecaster, features, targets, d)
    if u.size < 20:
        raise ContractError(f"Se requieren al menos 20 pares para el KS del PIT, hay {u.size}")
    return float(kstest(u, "uniform").statistic)


def _energy_one(model: JdanModel, y: np.ndarray, m: int, rng: np.random.Generator) -> float:
    s = sample_with_rng(model, m, rng)
    first = float(np.mean(np.linalg.norm(s - y, axis=1)))
    second = float(cdist(s, s).sum()) / (2.0 * m * m)
    return first - second


def energy_score(forecaster: ConditionalDensity, features, targets, m_samples: int = 200, seed: int = 0) -> float:
    """
    Energy score medio con m_samples muestras por par; cada par usa su propio generador
    derivado de (seed, índice), así que el resultado no depende del paralelismo.
    """
    if m_samples < 2:
        raise ContractError("m_samples debe ser >= 2")
    xs, ys = _pairs(forecaster, features, targets)
    values = ordered_map(
        lambda i: _energy_one(forecaster.model_for(xs[i]), ys[i], m_samples, np.random.default_rng([seed, i])),
        range(ys.shape[0]),
    )
    return float(np.mean(values))


def evaluate(forecaster: ConditionalDensity, features, targets, m_samples: int = 200, seed: int = 0) -> MetricsReport:
    values, excluded = log_density_terms(forecaster, features, targets)
    if values.size == 0:
        raise ContractError("Ningún par dentro de las cotas para el log score")
    n = np.asarray(targets).reshape(-1, forecaster.dim).shape[0]
    logger.info("Evaluando %d pares (%d excluidos del log score)", n, excluded)
    crps: List[float] = [crps_marginal(forecaster, features, targets, d) for d in range(forecaster.dim)]
    ks: List[float] = [pit_ks(forecaster, features, targets, d) for d in range(forecaster.dim)]
    return MetricsReport(
        mean_log_score=float(np.sum(values) / values.size),
        crps=crps,
        pit_ks=ks,
        energy_score=energy_score(forecaster, features, targets, m_samples, seed),
        n_evaluated=n,
        n_excluded_log_score=excluded,
    )

from typing import List, Tuple

import numpy as np

from src.domain.dataset import Dataset
from src.domain.errors import ContractError, DegenerateDimensionError
from src.domain.schemas import AffineMap, Bounds


def fit_bounds(targets, margin: float = 0.05) -> List[Bounds]:
    """L_d = min - margin·rango, U_d = max + margin·rango, por columna."""
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 2:
        raise ContractError("targets debe ser una matriz n×D")
    if margin < 0:
        raise ContractError("margin debe ser >= 0")
    bounds = []
    for d in range(targets.shape[1]):
        column = targets[:, d]
        if np.unique(column).size < 2:
            raise DegenerateDimensionError(d)
        lo, hi = float(column.min()), float(column.max())
        span = hi - lo
        bounds.append(Bounds(lower=lo - margin * span, upper=hi + margin * span))
    return bounds


def fit_feature_scaling(features) -> List[AffineMap]:
    """Estandarización media/desviación por columna; columnas constantes usan escala 1."""
    features = np.asarray(features, dtype=float)
    maps = []
    for j in range(features.shape[1]):
        std = float(features[:, j].std())
        maps.append(AffineMap(shift=float(features[:, j].mean()), scale=std if std > 0 else 1.0))
    return maps


def split_indices(n: int, validation_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Partición determinista (train, validación) dada la semilla."""
    if not 0.0 < validation_fraction < 1.0:
        raise ContractError("validation_fraction debe estar en (0, 1)")
    order = np.random.default_rng(seed).permutation(n)
    n_val = max(1, int(round(n * validation_fraction)))
    if n_val >= n:
        raise ContractError(f"No quedan filas de entrenamiento con n={n}")
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def prepare_for_training(dataset: Dataset, validation_fraction: float, seed: int, margin: float = 0.05) -> Dataset:
    """
    Ajusta cotas (si faltan) y escalado de features solo con las filas de entrenamiento.
    """
    train_idx, _ = split_indices(len(dataset), validation_fraction, seed)
    train = dataset.subset(train_idx)
    bounds = dataset.bounds or fit_bounds(train.targets, margin)
    scaling = fit_feature_scaling(train.features) if dataset.feature_dim else []
    return Dataset(
        features=dataset.features,
        targets=dataset.targets,
        feature_columns=dataset.feature_columns,
        target_columns=dataset.target_columns,
        bounds=bounds,
        feature_scaling=scaling,
        lag_windows=dataset.lag_windows,
        dropped_rows=dataset.dropped_rows,
    )

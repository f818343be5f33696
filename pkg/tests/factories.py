"""Constructores de modelos y arquitecturas pequeños compartidos por las pruebas."""
from typing import List, Optional, Sequence

import numpy as np

from src.domain.activation import Activation
from src.domain.models import CorrelationParams, JdanModel, MarginalNetParams, pair_count
from src.domain.schemas import ArchitectureDescriptor, Bounds, MarginalArch
from src.services.hypernet import materialize, output_dim


def unit_bounds(dim: int) -> List[Bounds]:
    return [Bounds(lower=0.0, upper=1.0) for _ in range(dim)]


def linear_marginal(shift: float = 0.0, scale: float = 1.0) -> MarginalNetParams:
    """Red [1, 1] lineal: su CDF normalizada es la uniforme sobre cualquier soporte."""
    return MarginalNetParams([1, 1], [np.zeros((1, 1))], [np.zeros(1)], Activation.LINEAR, shift, scale)


def uniform_model(dim: int = 2, effective: Optional[Sequence[float]] = None,
                  bounds: Optional[List[Bounds]] = None) -> JdanModel:
    effective = np.zeros(pair_count(dim)) if effective is None else np.asarray(effective, dtype=float)
    return JdanModel(
        dim=dim,
        marginals=[linear_marginal() for _ in range(dim)],
        correlations=CorrelationParams.from_effective(dim, effective),
        bounds=bounds or unit_bounds(dim),
    )


def small_arch(dim: int = 2, feature_dim: int = 0, hidden: Sequence[int] = (4,),
               hypernet_hidden: Sequence[int] = (6,), activation: Activation = Activation.SIGMOID,
               bounds: Optional[List[Bounds]] = None, heads: str = "shared") -> ArchitectureDescriptor:
    return ArchitectureDescriptor(
        dim=dim,
        feature_dim=feature_dim,
        marginals=[MarginalArch(hidden=list(hidden), activation=activation)],
        hypernet_hidden=list(hypernet_hidden),
        bounds=bounds if bounds is not None else unit_bounds(dim),
        heads=heads,
    )


def random_model(dim: int, rng: np.random.Generator, hidden: Sequence[int] = (5, 5),
                 activation: Activation = Activation.SIGMOID, raw_scale: float = 1.0,
                 bounds: Optional[List[Bounds]] = None) -> JdanModel:
    """Modelo materializado desde un vector crudo gaussiano."""
    arch = small_arch(dim, hidden=hidden, activation=activation, bounds=bounds)
    return materialize(rng.normal(0.0, raw_scale, size=output_dim(arch)), arch)

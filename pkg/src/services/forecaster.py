from typing import List, Optional

import numpy as np

from src.domain.errors import ContractError
from src.domain.models import ConditioningNet, JdanModel
from src.domain.schemas import AffineMap, ArchitectureDescriptor
from src.services.hypernet import materialize, nfn_forward


class StaticForecaster:
    """El mismo JdanModel para cualquier x."""
    def __init__(self, model: JdanModel):
        self.model = model

    @property
    def dim(self) -> int:
        return self.model.dim

    def model_for(self, x: Optional[np.ndarray] = None) -> JdanModel:
        return self.model


class FittedForecaster:
    """
    Hiperred entrenada: escala x, calcula el vector crudo y lo materializa.
    """
    def __init__(self, net: ConditioningNet, arch: ArchitectureDescriptor, feature_scaling: List[AffineMap]):
        self.net = net
        self.arch = arch
        self.feature_scaling = list(feature_scaling)

    @property
    def dim(self) -> int:
        return self.arch.dim

    def scale(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if not self.feature_scaling:
            return x
        if x.size != len(self.feature_scaling):
            raise ContractError(f"Se esperaban {len(self.feature_scaling)} features, llegaron {x.size}")
        return np.array([m.apply(v) for m, v in zip(self.feature_scaling, x)], dtype=float)

    def model_for(self, x: Optional[np.ndarray] = None) -> JdanModel:
        x = np.zeros(0) if x is None else x
        return materialize(nfn_forward(self.net, self.scale(x)), self.arch)

from typing import Protocol

import numpy as np

from src.domain.models import JdanModel


class ConditionalDensity(Protocol):
    """Cualquier pronosticador que entregue un JdanModel para un vector de features (sin escalar)."""

    @property
    def dim(self) -> int:
        ...

    def model_for(self, x: np.ndarray) -> JdanModel:
        ...

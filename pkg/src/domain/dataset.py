from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.domain.errors import ContractError
from src.domain.schemas import AffineMap, Bounds


def as_feature_matrix(features, n_rows: int) -> np.ndarray:
    """Features como matriz n×F; sin features devuelve n×0."""
    arr = np.asarray(features, dtype=float)
    if arr.size == 0:
        return np.zeros((n_rows, 0))
    return arr.reshape(n_rows, -1)


@dataclass
class Dataset:
    """
    Filas (x, y): features n×F y objetivos n×D, con cotas y escalado de features.
    Los objetivos se guardan en sus unidades originales; solo las features se estandarizan.
    """
    features: np.ndarray
    targets: np.ndarray
    feature_columns: List[str] = field(default_factory=list)
    target_columns: List[str] = field(default_factory=list)
    bounds: Optional[List[Bounds]] = None
    feature_scaling: List[AffineMap] = field(default_factory=list)
    lag_windows: List[int] = field(default_factory=list)
    dropped_rows: int = 0

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=float)
        if self.targets.ndim != 2:
            raise ContractError("targets debe ser una matriz n×D")
        self.features = as_feature_matrix(self.features, self.targets.shape[0])
        if not self.feature_scaling:
            self.feature_scaling = [AffineMap() for _ in range(self.feature_dim)]
        if len(self.feature_scaling) != self.feature_dim:
            raise ContractError("Un escalado por columna de features")
        if self.bounds is not None and len(self.bounds) != self.target_dim:
            raise ContractError("Una cota por dimensión objetivo")

    def __len__(self) -> int:
        return self.targets.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def target_dim(self) -> int:
        return self.targets.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return replace(self, features=self.features[index], targets=self.targets[index])

    def scaled_features(self) -> np.ndarray:
        if self.feature_dim == 0:
            return self.features.copy()
        return np.column_stack([m.apply(self.features[:, j]) for j, m in enumerate(self.feature_scaling)])

    def within_bounds(self) -> np.ndarray:
        """Máscara de filas cuyos objetivos están dentro de las cotas."""
        if self.bounds is None:
            return np.ones(len(self), dtype=bool)
        lower = np.array([b.lower for b in self.bounds])
        upper = np.array([b.upper for b in self.bounds])
        return np.all((self.targets >= lower) & (self.targets <= upper), axis=1)

    def split(self, train_index, validation_index) -> Tuple["Dataset", "Dataset"]:
        return self.subset(train_index), self.subset(validation_index)

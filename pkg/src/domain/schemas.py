from typing import ClassVar, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.domain.activation import Activation

MAX_DIM = 12


class Bounds(BaseModel):
    """
    Soporte acotado [lower, upper] de una dimensión objetivo, en unidades del objetivo.
    """
    lower: float
    upper: float
    model_config: ClassVar[ConfigDict] = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _strict_order(self):
        if not self.lower < self.upper:
            raise ValueError(f"Cotas inválidas: lower={self.lower} debe ser < upper={self.upper}")
        return self

    @property
    def width(self) -> float:
        return self.upper - self.lower


class AffineMap(BaseModel):
    """Escalado por columna: scaled = (value - shift) / scale."""
    shift: float = 0.0
    scale: float = Field(1.0, gt=0)

    def apply(self, values):
        return (np.asarray(values, dtype=float) - self.shift) / self.scale

    def invert(self, values):
        return np.asarray(values, dtype=float) * self.scale + self.shift


class MarginalArch(BaseModel):
    hidden: List[int] = Field(default_factory=lambda: [10, 10], description="Capas ocultas de la red marginal")
    activation: Activation = Activation.SIGMOID

    @model_validator(mode="after")
    def _positive(self):
        if any(h < 1 for h in self.hidden):
            raise ValueError("Los tamaños de capa deben ser >= 1")
        return self

    def layer_sizes(self) -> List[int]:
        return [1, *self.hidden, 1]


class ArchitectureDescriptor(BaseModel):
    """
    Descriptor de arquitectura: D marginales, cotas, dimensión de features y la hiperred.
    Con feature_dim=0 (modo incondicional) la hiperred no tiene capas ocultas y su sesgo
    de salida es el propio vector crudo entrenable.
    """
    dim: int = Field(..., ge=2, description="Número de variables objetivo D")
    marginals: List[MarginalArch] = Field(default_factory=list)
    bounds: Optional[List[Bounds]] = Field(None, description="Cotas por dimensión; se ajustan con los datos si faltan")
    feature_dim: int = Field(0, ge=0, description="Número de features F")
    hypernet_hidden: List[int] = Field(default_factory=lambda: [64, 64])
    hypernet_activation: Activation = Activation.SIGMOID
    heads: Literal["shared", "per_dimension"] = "shared"
    init_scale: float = Field(0.1, gt=0)
    max_dim: int = Field(MAX_DIM, ge=2)

    @model_validator(mode="after")
    def _consistent(self):
        if self.dim > self.max_dim:
            raise ValueError(f"D={self.dim} excede el máximo configurado {self.max_dim}")
        if not self.marginals:
            self.marginals = [MarginalArch() for _ in range(self.dim)]
        elif len(self.marginals) == 1 and self.dim > 1:
            self.marginals = [self.marginals[0].model_copy() for _ in range(self.dim)]
        if len(self.marginals) != self.dim:
            raise ValueError(f"Se esperaban {self.dim} marginales, hay {len(self.marginals)}")
        if self.bounds is not None and len(self.bounds) != self.dim:
            raise ValueError(f"Se esperaban {self.dim} cotas, hay {len(self.bounds)}")
        if any(h < 1 for h in self.hypernet_hidden):
            raise ValueError("Los tamaños de capa de la hiperred deben ser >= 1")
        if self.feature_dim == 0:
            self.hypernet_hidden = []
        return self

    def marginal_layer_sizes(self, d: int) -> List[int]:
        return self.marginals[d].layer_sizes()

    def with_bounds(self, bounds: List[Bounds]) -> "ArchitectureDescriptor":
        return self.model_copy(update={"bounds": list(bounds)})


class TrainConfig(BaseModel):
    learning_rate: float = Field(1e-3, gt=0)
    batch_size: int = Field(64, gt=0)
    max_epochs: int = Field(500, gt=0)
    patience: int = Field(20, gt=0)
    seed: int = 0
    grad_clip: float = Field(10.0, gt=0)
    validation_fraction: float = Field(0.2, gt=0, lt=1)
    chunk_size: int = Field(32, gt=0, description="Muestras por fragmento en el gradiente paralelo")


class EpochRecord(BaseModel):
    epoch: int
    train_nll: float
    val_nll: float


class TrainReport(BaseModel):
    epochs: List[EpochRecord] = Field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_validation_nll: float = float("inf")
    wall_time: float = 0.0
    skipped_batches: int = 0


class MetricsReport(BaseModel):
    """
    Resumen de evaluación probabilística. log_score en nats (mayor es mejor).
    """
    mean_log_score: float
    crps: List[float]
    pit_ks: List[float]
    energy_score: float
    n_evaluated: int
    n_excluded_log_score: int = 0

    def to_table(self) -> str:
        lines = [
            f"{'métrica':<22}{'valor':>14}",
            f"{'n evaluados':<22}{self.n_evaluated:>14d}",
            f"{'excluidos (log)':<22}{self.n_excluded_log_score:>14d}",
            f"{'log score medio':<22}{self.mean_log_score:>14.6f}",
            f"{'energy score':<22}{self.energy_score:>14.6f}",
        ]
        for d, (c, k) in enumerate(zip(self.crps, self.pit_ks), start=1):
            lines.append(f"{f'CRPS y{d}':<22}{c:>14.6f}")
            lines.append(f"{f'PIT KS y{d}':<22}{k:>14.6f}")
        return "\n".join(lines)


class Witness(BaseModel):
    layer_sizes: List[int]
    effective_weights: List[List[List[float]]]
    biases: List[List[float]]
    y: List[float]
    p: int
    q: int
    value: float
    trial: int


class WitnessReport(BaseModel):
    activation: Activation
    dim: int
    hidden_layers: int
    trials: int
    seed: int
    witness: Optional[Witness] = None
    message: str = ""


class VerifyCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerifyReport(BaseModel):
    level: Literal["quick", "full"]
    checks: List[VerifyCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class ColumnSpec(BaseModel):
    """Columnas usadas de un CSV y ventanas de rezago aplicadas a las columnas objetivo."""
    feature_columns: List[str] = Field(default_factory=list)
    target_columns: List[str] = Field(..., min_length=2)
    lag_windows: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _valid_lags(self):
        if any(k < 1 for k in self.lag_windows):
            raise ValueError("Las ventanas de rezago deben ser >= 1")
        if len(set(self.target_columns)) != len(self.target_columns):
            raise ValueError("Columnas objetivo repetidas")
        return self

    def lag_columns(self) -> List[str]:
        return [f"{c}_lag{k}" for k in self.lag_windows for c in self.target_columns]

    def all_feature_columns(self) -> List[str]:
        return [*self.feature_columns, *self.lag_columns()]

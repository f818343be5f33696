"""
Esquemas de configuración de ejecución (JSON validado con pydantic).
Las rutas relativas se resuelven respecto del directorio del archivo de configuración.
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import orjson
from pydantic import BaseModel, Field, model_validator

from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.schemas import MAX_DIM, ArchitectureDescriptor, Bounds, ColumnSpec, MarginalArch, TrainConfig


class DataSpec(ColumnSpec):
    """CSV de entrenamiento, columnas usadas y cotas opcionales (se ajustan si faltan)."""
    path: str = Field(..., description="Ruta del CSV")
    bounds: Optional[List[Bounds]] = None

    @model_validator(mode="after")
    def _exists(self):
        if not Path(self.path).exists():
            raise ValueError(f"No existe el archivo de datos: {self.path}")
        if self.bounds is not None and len(self.bounds) != len(self.target_columns):
            raise ValueError("Una cota por columna objetivo")
        return self

    def columns(self) -> ColumnSpec:
        return ColumnSpec(feature_columns=self.feature_columns, target_columns=self.target_columns,
                          lag_windows=self.lag_windows)


class ArchitectureSpec(BaseModel):
    """Opciones de arquitectura; D y F se deducen de los datos."""
    marginals: List[MarginalArch] = Field(default_factory=list)
    hypernet_hidden: List[int] = Field(default_factory=lambda: [64, 64])
    hypernet_activation: Activation = Activation.SIGMOID
    heads: Literal["shared", "per_dimension"] = "shared"
    init_scale: float = Field(0.1, gt=0)
    max_dim: int = Field(MAX_DIM, ge=2)

    def resolve(self, dim: int, feature_dim: int, bounds: Optional[List[Bounds]] = None) -> ArchitectureDescriptor:
        return ArchitectureDescriptor(dim=dim, feature_dim=feature_dim, bounds=bounds, **self.model_dump())


class OutputSpec(BaseModel):
    model: str = "model.json"
    report: str = "train_report.csv"
    checkpoint: Optional[str] = Field(None, description="Documento con estado del optimizador, reescrito al mejorar")


class TrainRunConfig(BaseModel):
    data: DataSpec
    architecture: ArchitectureSpec = Field(default_factory=ArchitectureSpec)
    training: TrainConfig = Field(default_factory=TrainConfig)
    output: OutputSpec = Field(default_factory=OutputSpec)


def _resolve_paths(raw: Dict[str, Any], base: Path) -> Dict[str, Any]:
    def fix(value):
        return value if value is None or Path(value).is_absolute() else str(base / value)

    data = dict(raw.get("data") or {})
    if "path" in data:
        data["path"] = fix(data["path"])
    output = {k: fix(v) for k, v in (raw.get("output") or {}).items()}
    return {**raw, "data": data, "output": output}


def load_train_config(path: str, seed: Optional[int] = None, out: Optional[str] = None) -> TrainRunConfig:
    """Lee y valida la configuración; --seed y --out sobrescriben la semilla y la ruta del modelo."""
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"No existe la configuración: {path}")
    try:
        raw = orjson.loads(config_path.read_bytes())
    except orjson.JSONDecodeError as e:
        raise ContractError(f"{path} no es JSON válido: {e}") from e
    raw = _resolve_paths(raw, config_path.parent)
    if seed is not None:
        raw["training"] = {**(raw.get("training") or {}), "seed": seed}
    if out is not None:
        raw["output"] = {**raw["output"], "model": out}
    return TrainRunConfig.model_validate(raw)

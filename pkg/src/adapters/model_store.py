"""
Documentos JSON de modelo ("jdan-v1") y checkpoints de entrenamiento, serializados con orjson.

Dos clases de documento:
  - "static": un JdanModel explícito {dim, bounds, marginals, correlations}.
  - "conditional": la hiperred entrenada con su ArchitectureDescriptor, el escalado de features
    y los nombres de columnas y rezagos para leer CSV sin configuración adicional.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import orjson

from src.domain.activation import Activation
from src.domain.errors import ContractError, ModelVersionError
from src.domain.models import ConditioningNet, CorrelationParams, JdanModel, MarginalNetParams, MlpHead
from src.domain.schemas import AffineMap, ArchitectureDescriptor, Bounds, ColumnSpec
from src.services.forecaster import FittedForecaster, StaticForecaster

logger = logging.getLogger(__name__)

MODEL_VERSION = "jdan-v1"
_DUMP_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2


@dataclass
class StoredModel:
    forecaster: Union[StaticForecaster, FittedForecaster]
    columns: Optional[ColumnSpec] = None


def _arrays(values) -> List[np.ndarray]:
    return [np.asarray(v, dtype=float) for v in values]


def _matrices(values, shapes) -> List[np.ndarray]:
    return [np.asarray(v, dtype=float).reshape(shape) for v, shape in zip(values, shapes)]


def _layer_shapes(layer_sizes: List[int]):
    return [(n_out, n_in) for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:])]


# --- JdanModel explícito ---

def model_to_document(model: JdanModel) -> Dict[str, Any]:
    return {
        "version": MODEL_VERSION,
        "kind": "static",
        "dim": model.dim,
        "bounds": [b.model_dump() for b in model.bounds],
        "marginals": [
            {
                "layer_sizes": m.layer_sizes,
                "activation": m.activation.value,
                "raw_weights": [w for w in m.raw_weights],
                "biases": [b for b in m.biases],
                "input_shift": m.input_shift,
                "input_scale": m.input_scale,
            }
            for m in model.marginals
        ],
        "correlations": {"raw": model.correlations.raw},
    }


def model_from_document(doc: Dict[str, Any]) -> JdanModel:
    try:
        marginals = [
            MarginalNetParams(
                layer_sizes=list(m["layer_sizes"]),
                raw_weights=_matrices(m["raw_weights"], _layer_shapes(m["layer_sizes"])),
                biases=_arrays(m["biases"]),
                activation=Activation.parse(m["activation"]),
                input_shift=float(m.get("input_shift", 0.0)),
                input_scale=float(m.get("input_scale", 1.0)),
            )
            for m in doc["marginals"]
        ]
        dim = int(doc["dim"])
        return JdanModel(
            dim=dim,
            marginals=marginals,
            correlations=CorrelationParams(dim=dim, raw=np.asarray(doc["correlations"]["raw"], dtype=float)),
            bounds=[Bounds(**b) for b in doc["bounds"]],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ContractError(f"Documento de modelo mal formado: {e}") from e


# --- hiperred condicional ---

def fitted_to_document(forecaster: FittedForecaster, columns: Optional[ColumnSpec] = None) -> Dict[str, Any]:
    net = forecaster.net
    doc = {
        "version": MODEL_VERSION,
        "kind": "conditional",
        "dim": forecaster.arch.dim,
        "bounds": [b.model_dump() for b in forecaster.arch.bounds or []],
        "architecture": forecaster.arch.model_dump(mode="json"),
        "network": {
            "input_dim": net.input_dim,
            "heads": [
                {
                    "layer_sizes": h.layer_sizes,
                    "activation": h.activation.value,
                    "weights": h.weights,
                    "biases": h.biases,
                }
                for h in net.heads
            ],
        },
        "feature_scaling": [m.model_dump() for m in forecaster.feature_scaling],
    }
    if columns is not None:
        doc["columns"] = columns.model_dump()
    return doc


def fitted_from_document(doc: Dict[str, Any]) -> FittedForecaster:
    try:
        arch = ArchitectureDescriptor.model_validate(doc["architecture"])
        heads = [
            MlpHead(
                layer_sizes=list(h["layer_sizes"]),
                weights=_matrices(h["weights"], _layer_shapes(h["layer_sizes"])),
                biases=[np.asarray(b, dtype=float).reshape(-1) for b in h["biases"]],
                activation=Activation.parse(h["activation"]),
            )
            for h in doc["network"]["heads"]
        ]
        net = ConditioningNet(input_dim=int(doc["network"]["input_dim"]), heads=heads)
        scaling = [AffineMap(**m) for m in doc.get("feature_scaling", [])]
    except (KeyError, TypeError) as e:
        raise ContractError(f"Documento de modelo mal formado: {e}") from e
    return FittedForecaster(net, arch, scaling)


# --- archivos ---

def save_document(path: str, doc: Dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(orjson.dumps(doc, option=_DUMP_OPTIONS))


def load_document(path: str) -> Dict[str, Any]:
    if not Path(path).exists():
        raise FileNotFoundError(f"No existe el archivo de modelo: {path}")
    with open(path, "rb") as f:
        try:
            doc = orjson.loads(f.read())
        except orjson.JSONDecodeError as e:
            raise ContractError(f"{path} no es JSON válido: {e}") from e
    version = doc.get("version") if isinstance(doc, dict) else None
    if version != MODEL_VERSION:
        raise ModelVersionError(f"Versión de modelo {version!r} no soportada; se esperaba {MODEL_VERSION!r}")
    return doc


def save_model(path: str, model: JdanModel) -> None:
    save_document(path, model_to_document(model))


def save_fitted(path: str, forecaster: FittedForecaster, columns: Optional[ColumnSpec] = None) -> None:
    save_document(path, fitted_to_document(forecaster, columns))


def forecaster_from_document(doc: Dict[str, Any]) -> StoredModel:
    kind = doc.get("kind", "static")
    if kind == "static":
        return StoredModel(StaticForecaster(model_from_document(doc)))
    if kind == "conditional":
        columns = ColumnSpec.model_validate(doc["columns"]) if doc.get("columns") else None
        return StoredModel(fitted_from_document(doc), columns)
    raise ContractError(f"Tipo de documento desconocido: {kind!r}")


def load_forecaster(path: str) -> StoredModel:
    stored = forecaster_from_document(load_document(path))
    logger.info("Modelo cargado de %s (D=%d)", path, stored.forecaster.dim)
    return stored


# --- checkpoints ---

def checkpoint_document(model_doc: Dict[str, Any], optimizer_state: Dict[str, Any], epoch: int) -> Dict[str, Any]:
    return {**model_doc, "optimizer": optimizer_state, "epoch": int(epoch)}

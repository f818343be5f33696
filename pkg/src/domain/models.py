from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Tuple

import numpy as np

from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.schemas import Bounds


def pair_count(dim: int) -> int:
    return dim * (dim - 1) // 2


def pair_indices(dim: int) -> List[Tuple[int, int]]:
    """Pares (d, i), d < i, en orden triangular superior por filas: (0,1), (0,2), ..., (1,2), ..."""
    return list(combinations(range(dim), 2))


def _check_layers(layer_sizes: List[int], weights: List[np.ndarray], biases: List[np.ndarray], owner: str) -> None:
    if len(layer_sizes) < 2 or any(s < 1 for s in layer_sizes):
        raise ContractError(f"{owner}: tamaños de capa inválidos {layer_sizes}")
    if len(weights) != len(layer_sizes) - 1 or len(biases) != len(layer_sizes) - 1:
        raise ContractError(f"{owner}: se esperaban {len(layer_sizes) - 1} capas de pesos y sesgos")
    for k, (w, b) in enumerate(zip(weights, biases)):
        expected = (layer_sizes[k + 1], layer_sizes[k])
        if w.shape != expected or b.shape != (layer_sizes[k + 1],):
            raise ContractError(f"{owner}: capa {k} con forma {w.shape}/{b.shape}, se esperaba {expected}")


@dataclass
class MarginalNetParams:
    """
    Parámetros crudos de una red monótona de una entrada (una marginal).
    Los pesos efectivos se obtienen con positivity_map al evaluar; los sesgos no se restringen.
    La entrada se estandariza con (y - input_shift) / input_scale antes de la primera capa.
    """
    layer_sizes: List[int]
    raw_weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: Activation = Activation.SIGMOID
    input_shift: float = 0.0
    input_scale: float = 1.0

    def __post_init__(self):
        if self.layer_sizes[0] != 1 or self.layer_sizes[-1] != 1:
            raise ContractError(f"Red marginal: entrada y salida deben tener ancho 1, no {self.layer_sizes}")
        _check_layers(self.layer_sizes, self.raw_weights, self.biases, "Red marginal")
        if not self.input_scale > 0:
            raise ContractError("input_scale debe ser positivo")

    @property
    def raw_count(self) -> int:
        return marginal_raw_count(self.layer_sizes)


def marginal_raw_count(layer_sizes: List[int]) -> int:
    return sum(a * b + b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))


@dataclass
class CorrelationParams:
    """Correlaciones crudas r_{di}; la efectiva es tanh(r_{di}) en (-1, 1)."""
    dim: int
    raw: np.ndarray

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=float).reshape(-1)
        if self.raw.shape[0] != pair_count(self.dim):
            raise ContractError(f"Se esperaban {pair_count(self.dim)} correlaciones para D={self.dim}, hay {self.raw.shape[0]}")

    @property
    def effective(self) -> np.ndarray:
        return np.tanh(self.raw)

    @classmethod
    def from_effective(cls, dim: int, values) -> "CorrelationParams":
        values = np.asarray(values, dtype=float).reshape(-1)
        if np.any(np.abs(values) >= 1.0):
            raise ContractError("Las correlaciones efectivas deben estar en (-1, 1)")
        return cls(dim=dim, raw=np.arctanh(values))


@dataclass
class JdanModel:
    """
    Modelo conjunto: D redes marginales, correlaciones por pares y cotas por dimensión.
    """
    dim: int
    marginals: List[MarginalNetParams]
    correlations: CorrelationParams
    bounds: List[Bounds]

    def __post_init__(self):
        if self.dim < 2:
            raise ContractError(f"D debe ser >= 2, no {self.dim}")
        if len(self.marginals) != self.dim or len(self.bounds) != self.dim or self.correlations.dim != self.dim:
            raise ContractError("dim, marginales, cotas y correlaciones no coinciden")

    @property
    def lower(self) -> np.ndarray:
        return np.array([b.lower for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.bounds])


@dataclass
class MisoNetParams:
    """
    Red de pesos positivos con D entradas y una salida, usada solo por el diagnóstico.
    Una activación por capa (incluida la de salida).
    """
    layer_sizes: List[int]
    raw_weights: List[np.ndarray]
    biases: List[np.ndarray]
    activations: List[Activation] = field(default_factory=list)

    def __post_init__(self):
        if self.layer_sizes[-1] != 1:
            raise ContractError("La red MISO debe tener una única salida")
        _check_layers(self.layer_sizes, self.raw_weights, self.biases, "Red MISO")
        if len(self.activations) != len(self.layer_sizes) - 1:
            raise ContractError("Se requiere una activación por capa")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def depth(self) -> int:
        """Número de capas ocultas."""
        return len(self.layer_sizes) - 2


@dataclass
class MlpHead:
    """Un perceptrón sin restricciones; la capa de salida es lineal."""
    layer_sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: Activation = Activation.SIGMOID

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ContractError(f"Cabeza MLP: tamaños inválidos {self.layer_sizes}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.layer_sizes) - 1:
            raise ContractError("Cabeza MLP: número de capas inconsistente")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_sizes[k + 1], self.layer_sizes[k]) or b.shape != (self.layer_sizes[k + 1],):
                raise ContractError(f"Cabeza MLP: forma inválida en la capa {k}")


@dataclass
class ConditioningNet:
    """
    Hiperred de condicionamiento: x -> vector crudo de parámetros de un JdanModel.
    Las salidas de las cabezas se concatenan en el orden de partición.
    """
    input_dim: int
    heads: List[MlpHead]

    def __post_init__(self):
        for head in self.heads:
            if head.layer_sizes[0] != self.input_dim:
                raise ContractError(f"Cabeza con entrada {head.layer_sizes[0]} para F={self.input_dim}")

    @property
    def output_dim(self) -> int:
        return sum(h.layer_sizes[-1] for h in self.heads)

    def parameters(self) -> List[np.ndarray]:
        params: List[np.ndarray] = []
        for head in self.heads:
            for w, b in zip(head.weights, head.biases):
                params.extend([w, b])
        return params

    def with_parameters(self, params: List[np.ndarray]) -> "ConditioningNet":
        it = iter(params)
        heads = []
        for head in self.heads:
            weights, biases = [], []
            for _ in head.weights:
                weights.append(np.array(next(it), dtype=float))
                biases.append(np.array(next(it), dtype=float))
            heads.append(MlpHead(head.layer_sizes, weights, biases, head.activation))
        return ConditioningNet(self.input_dim, heads)

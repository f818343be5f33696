from typing import Dict, Optional, Tuple

import numpy as np

from src.domain.density_protocol import ConditionalDensity
from src.domain.errors import ContractError
from src.services.copula import joint_pdf, sample

MAX_FREE_DIMS = 3


class SampleUseCase:
    """
    Muestras y rejillas de densidad de un pronosticador para un contexto x fijo.
    """
    def __init__(self, forecaster: ConditionalDensity, x: Optional[np.ndarray] = None):
        self.forecaster = forecaster
        self.model = forecaster.model_for(np.zeros(0) if x is None else np.asarray(x, dtype=float))

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise ContractError("n debe ser >= 1")
        return sample(self.model, n, seed)

    def density_grid(self, resolution: int, fixed: Optional[Dict[int, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Evalúa joint_pdf en los centros de una rejilla regular sobre las dimensiones libres;
        las dimensiones fijadas (índice base 0) toman el valor dado.
        """
        fixed = dict(fixed or {})
        if resolution < 2:
            raise ContractError("La resolución de la rejilla debe ser >= 2")
        model = self.model
        for d, value in fixed.items():
            if not 0 <= d < model.dim:
                raise ContractError(f"Dimensión fijada {d + 1} fuera de rango")
            if not model.bounds[d].lower <= value <= model.bounds[d].upper:
                raise ContractError(f"Valor fijado {value} fuera de las cotas de y{d + 1}")
        free = [d for d in range(model.dim) if d not in fixed]
        if len(free) > MAX_FREE_DIMS:
            raise ContractError(f"{len(free)} dimensiones libres; fije todas salvo {MAX_FREE_DIMS} como máximo")
        axes = []
        for d in free:
            b = model.bounds[d]
            axes.append(b.lower + (np.arange(resolution) + 0.5) * b.width / resolution)
        mesh = np.meshgrid(*axes, indexing="ij") if axes else []
        n_points = resolution ** len(free)
        points = np.empty((n_points, model.dim))
        for k, d in enumerate(free):
            points[:, d] = mesh[k].reshape(-1)
        for d, value in fixed.items():
            points[:, d] = value
        values = np.asarray(joint_pdf(model, points)).reshape(-1)
        return points, values

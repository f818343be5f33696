import logging
from typing import Tuple

import numpy as np

from src.domain.dataset import Dataset
from src.domain.density_protocol import ConditionalDensity
from src.domain.errors import ContractError
from src.domain.schemas import MetricsReport
from src.services.metrics import evaluate, pit_values

logger = logging.getLogger(__name__)


class EvaluateUseCase:
    """
    Evalúa un pronosticador sobre un conjunto de prueba y, si se pide, devuelve los valores PIT
    por dimensión para volcarlos a CSV.
    """
    def __init__(self, forecaster: ConditionalDensity, m_samples: int = 200, seed: int = 0):
        self.forecaster = forecaster
        self.m_samples = m_samples
        self.seed = seed

    def run(self, dataset: Dataset) -> MetricsReport:
        if dataset.target_dim != self.forecaster.dim:
            raise ContractError(f"El dataset tiene D={dataset.target_dim}, el modelo D={self.forecaster.dim}")
        return evaluate(self.forecaster, dataset.features, dataset.targets, self.m_samples, self.seed)

    def pit(self, dataset: Dataset) -> np.ndarray:
        columns = [pit_values(self.forecaster, dataset.features, dataset.targets, d) for d in range(self.forecaster.dim)]
        return np.column_stack(columns)

    def run_with_pit(self, dataset: Dataset) -> Tuple[MetricsReport, np.ndarray]:
        return self.run(dataset), self.pit(dataset)

import logging
from typing import List, Tuple

import numpy as np

from src.domain.density_protocol import ConditionalDensity
from src.domain.models import JdanModel
from src.domain.schemas import VerifyCheck, VerifyReport
from src.services.forecaster import FittedForecaster, StaticForecaster
from src.services.hypernet import materialize, nfn_forward, output_dim
from src.services.verification import Level, verify_model

logger = logging.getLogger(__name__)


class VerifyUseCase:
    """
    Ejecuta la batería de invariantes sobre los modelos que produce un pronosticador.
    Para una hiperred se verifican `contexts` contextos x ~ N(0, I) en el espacio escalado;
    en nivel full se añaden vectores crudos aleatorios materializados directamente.
    """
    def __init__(self, forecaster: ConditionalDensity, level: Level = "quick", contexts: int = 3, seed: int = 0):
        self.forecaster = forecaster
        self.level = level
        self.contexts = max(1, contexts)
        self.seed = seed

    def _models(self) -> List[Tuple[str, JdanModel]]:
        if isinstance(self.forecaster, StaticForecaster):
            return [("modelo", self.forecaster.model)]
        if not isinstance(self.forecaster, FittedForecaster):
            return [("modelo", self.forecaster.model_for(None))]
        net, arch = self.forecaster.net, self.forecaster.arch
        rng = np.random.default_rng(self.seed)
        models = []
        for k in range(self.contexts):
            x = rng.normal(size=net.input_dim)
            models.append((f"contexto {k}", materialize(nfn_forward(net, x), arch)))
            if net.input_dim == 0:
                break
        if self.level == "full":
            for k in range(self.contexts):
                models.append((f"crudo {k}", materialize(rng.normal(size=output_dim(arch)), arch)))
        return models

    def run(self) -> VerifyReport:
        checks: List[VerifyCheck] = []
        for k, (label, model) in enumerate(self._models()):
            for check in verify_model(model, self.level, self.seed + k):
                checks.append(VerifyCheck(name=f"{label}: {check.name}", passed=check.passed, detail=check.detail))
        report = VerifyReport(level=self.level, checks=checks)
        failed = [c.name for c in checks if not c.passed]
        if failed:
            logger.warning("Verificación con %d fallos: %s", len(failed), ", ".join(failed))
        return report

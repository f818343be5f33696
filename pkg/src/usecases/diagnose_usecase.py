from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.schemas import WitnessReport
from src.services.miso_diagnostic import find_negative_witness


class DiagnoseUseCase:
    """
    Busca un contraejemplo a la no negatividad de la derivada mixta de una red MISO
    de pesos positivos y lo empaqueta en un reporte (exista o no).
    """
    def __init__(self, activation: Activation, dim: int = 2, seed: int = 0, trials: int = 10_000,
                 hidden: int = 4, hidden_layers: int = 1):
        if trials < 1:
            raise ContractError("trials debe ser >= 1")
        if hidden < 1 or hidden_layers < 1:
            raise ContractError("La red MISO necesita al menos una capa oculta con una unidad")
        self.activation = activation
        self.dim = dim
        self.seed = seed
        self.trials = trials
        self.hidden = hidden
        self.hidden_layers = hidden_layers

    def run(self) -> WitnessReport:
        witness = find_negative_witness(self.activation, self.dim, self.seed, self.trials,
                                        self.hidden, self.hidden_layers)
        if witness is None:
            message = f"no witness in {self.trials} trials"
        else:
            message = f"negative mixed partial {witness.value:.6e} at trial {witness.trial}"
        return WitnessReport(
            activation=self.activation,
            dim=self.dim,
            hidden_layers=self.hidden_layers,
            trials=self.trials,
            seed=self.seed,
            witness=witness,
            message=message,
        )

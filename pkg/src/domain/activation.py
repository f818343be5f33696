from enum import Enum

from src.domain.errors import ContractError


class Activation(str, Enum):
    """
    Tipos de activación soportados. El valor es la cadena usada en archivos de modelo y config.
    """
    SIGMOID = "sigmoid"
    TANH = "tanh"
    LINEAR = "linear"
    RELU = "relu"
    EXPONENTIAL = "exp"

    @classmethod
    def parse(cls, text: str) -> "Activation":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ContractError(f"Activación desconocida '{text}' (válidas: {valid})")

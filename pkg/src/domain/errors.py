from typing import Any, Dict, Optional


class JdanError(Exception):
    """
    Raíz de todos los errores del paquete. `exit_code` lo usa la CLI.
    """
    exit_code: int = 3


class ContractError(JdanError):
    exit_code = 2


class DomainError(JdanError):
    pass


class EvaluationError(JdanError):
    def __init__(self, message: str, layer: int):
        super().__init__(f"{message} (capa {layer})")
        self.layer = layer


class DegenerateMarginalError(JdanError):
    def __init__(self, denominator: float, dim: Optional[int] = None):
        where = f" en la dimensión {dim}" if dim is not None else ""
        super().__init__(f"Marginal degenerada{where}: Ψ(U)-Ψ(L)={denominator:.3e}")
        self.denominator = denominator
        self.dim = dim


class InversionError(JdanError):
    def __init__(self, p: float, lower: float, upper: float):
        super().__init__(f"La bisección no convergió para p={p!r} en [{lower!r}, {upper!r}]")
        self.p = p
        self.lower = lower
        self.upper = upper


class BracketError(JdanError):
    exit_code = 2


class NonFiniteLossError(JdanError):
    def __init__(self, index: int, value: float):
        super().__init__(f"Pérdida no finita ({value!r}) en la muestra {index}")
        self.index = index
        self.value = value


class NonFiniteGradientError(JdanError):
    pass


class TrainingFailure(JdanError):
    def __init__(self, message: str, checkpoint: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.checkpoint = checkpoint


class VerificationFailure(JdanError):
    pass


class DataError(JdanError):
    exit_code = 2


class MissingColumnsError(DataError):
    def __init__(self, missing):
        super().__init__(f"Columnas ausentes: {', '.join(missing)}")
        self.missing = list(missing)


class EmptyDatasetError(DataError):
    pass


class CsvParseError(DataError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        if row is not None:
            message = f"{message} (fila {row}, columna '{column}')"
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateDimensionError(DataError):
    def __init__(self, dim: int):
        super().__init__(f"La dimensión {dim} es constante: no se pueden ajustar cotas")
        self.dim = dim


class ModelVersionError(JdanError):
    exit_code = 2

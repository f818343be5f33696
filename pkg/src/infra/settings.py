import logging
import os
from functools import lru_cache

from pydantic import BaseModel, Field, ValidationError, field_validator

from src.domain.errors import ContractError

# logging.getLevelNamesMapping() solo existe desde Python 3.11.
_level_names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))


class Settings(BaseModel):
    """Configuración leída del entorno."""
    threads: int = Field(1, ge=1, description="Máximo de hilos de trabajo (JDAN_THREADS)")
    log_level: str = Field("INFO", description="Nivel de logging (JDAN_LOG_LEVEL)")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        v = v.upper()
        if v not in _level_names():
            raise ValueError(f"nivel de logging desconocido: {v!r}")
        return v


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    threads = os.getenv("JDAN_THREADS") or str(os.cpu_count() or 1)
    try:
        return Settings(threads=threads, log_level=os.getenv("JDAN_LOG_LEVEL", "INFO"))
    except ValidationError as e:
        raise ContractError(f"Variables de entorno inválidas: {e}") from e

import logging
import sys
from typing import Optional

from src.infra.settings import get_settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None, quiet: bool = False) -> None:
    """Configura el logger raíz una sola vez; --quiet baja a WARNING."""
    chosen = "WARNING" if quiet else (level or get_settings().log_level)
    logging.basicConfig(level=chosen, format=LOG_FORMAT, stream=sys.stderr, force=True)

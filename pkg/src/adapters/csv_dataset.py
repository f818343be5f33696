import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from src.domain.dataset import Dataset
from src.domain.errors import CsvParseError, EmptyDatasetError, MissingColumnsError
from src.domain.schemas import Bounds, ColumnSpec

logger = logging.getLogger(__name__)


def _read_frame(path: str) -> pd.DataFrame:
    if not Path(path).exists():
        raise FileNotFoundError(f"No existe el archivo de datos: {path}")
    try:
        return pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise CsvParseError(f"CSV vacío o sin cabecera: {path}") from e
    except pd.errors.ParserError as e:
        raise CsvParseError(f"No se pudo leer {path}: {e}") from e


def _numeric_columns(frame: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
    """Convierte a float; una celda no vacía que no es un número finito es un error con fila y columna."""
    out = pd.DataFrame(index=frame.index)
    for col in columns:
        raw = frame[col]
        values = pd.to_numeric(raw, errors="coerce")
        bad = raw.notna() & raw.str.strip().ne("") & ~np.isfinite(values.astype(float))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            # +2: la cabecera ocupa la línea 1 del archivo
            raise CsvParseError(f"Valor no numérico o no finito {raw.iloc[row]!r}", row=row + 2, column=col)
        out[col] = values.astype(float)
    return out


def load_csv(path: str, columns: ColumnSpec, bounds: Optional[List[Bounds]] = None) -> Dataset:
    """
    Lee un CSV con cabecera y construye un Dataset. Para cada rezago k se añade la feature
    "<col>_lag<k>" con el valor objetivo k filas antes. Las filas con algún valor ausente
    en las columnas usadas (incluidas las perdidas por el rezago) se descartan.
    """
    frame = _read_frame(path)
    used = list(dict.fromkeys([*columns.feature_columns, *columns.target_columns]))
    missing = [c for c in used if c not in frame.columns]
    if missing:
        raise MissingColumnsError(missing)

    data = _numeric_columns(frame, used)
    for k in columns.lag_windows:
        for col in columns.target_columns:
            data[f"{col}_lag{k}"] = data[col].shift(k)

    feature_columns = columns.all_feature_columns()
    clean = data.dropna(subset=[*feature_columns, *columns.target_columns])
    dropped = len(data) - len(clean)
    if dropped:
        logger.info("%d filas descartadas por valores ausentes o rezagos en %s", dropped, path)
    if clean.empty:
        raise EmptyDatasetError(f"Ninguna fila utilizable en {path}")

    features = clean[feature_columns].to_numpy(dtype=float) if feature_columns else np.zeros((len(clean), 0))
    return Dataset(
        features=features,
        targets=clean[columns.target_columns].to_numpy(dtype=float),
        feature_columns=feature_columns,
        target_columns=list(columns.target_columns),
        bounds=list(bounds) if bounds else None,
        lag_windows=list(columns.lag_windows),
        dropped_rows=dropped,
    )

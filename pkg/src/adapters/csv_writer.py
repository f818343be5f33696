"""
Salidas CSV: muestras, reporte de entrenamiento, valores PIT y rejillas de densidad.
"""
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from src.domain.schemas import TrainReport

FLOAT_FORMAT = "%.17g"


def _write(frame: pd.DataFrame, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def target_header(dim: int, names: Optional[List[str]] = None) -> List[str]:
    return list(names) if names else [f"y{d}" for d in range(1, dim + 1)]


def write_samples(path: str, samples: np.ndarray) -> None:
    samples = np.asarray(samples, dtype=float)
    _write(pd.DataFrame(samples, columns=target_header(samples.shape[1])), path)


def write_train_report(path: str, report: TrainReport) -> None:
    rows = [e.model_dump() for e in report.epochs]
    _write(pd.DataFrame(rows, columns=["epoch", "train_nll", "val_nll"]), path)


def write_pit(path: str, pit: np.ndarray, names: Optional[List[str]] = None) -> None:
    pit = np.asarray(pit, dtype=float)
    columns = [f"pit_{c}" for c in target_header(pit.shape[1], names)]
    _write(pd.DataFrame(pit, columns=columns), path)


def write_density_grid(path: str, points: np.ndarray, values: np.ndarray) -> None:
    """Una fila por punto de la rejilla: y1..yD y el valor de joint_pdf."""
    frame = pd.DataFrame(np.asarray(points, dtype=float), columns=target_header(points.shape[1]))
    frame["pdf"] = np.asarray(values, dtype=float).reshape(-1)
    _write(frame, path)

"""
Un manejador por subcomando. Cada uno devuelve el código de salida; los errores del paquete
se propagan y src.main los traduce a códigos de salida.
"""
import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import orjson

from src.adapters.csv_dataset import load_csv
from src.adapters.csv_writer import write_density_grid, write_pit, write_samples, write_train_report
from src.adapters.model_store import StoredModel, load_forecaster, save_document, save_fitted
from src.api.schemas import load_train_config
from src.domain.activation import Activation
from src.domain.errors import ContractError, TrainingFailure, VerificationFailure
from src.domain.schemas import ColumnSpec
from src.services.forecaster import StaticForecaster
from src.usecases.diagnose_usecase import DiagnoseUseCase
from src.usecases.evaluate_usecase import EvaluateUseCase
from src.usecases.sample_usecase import SampleUseCase
from src.usecases.train_usecase import TrainUseCase
from src.usecases.verify_usecase import VerifyUseCase

logger = logging.getLogger(__name__)

_JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def _write_json(path: str, payload) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(orjson.dumps(payload, option=_JSON_OPTIONS))


def _require(value, flag: str):
    if value is None:
        raise ContractError(f"Falta el argumento {flag}")
    return value


def parse_vector(text: Optional[str]) -> Optional[np.ndarray]:
    """'0.1,2,-3' -> array([0.1, 2., -3.])"""
    if text is None or not text.strip():
        return None
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ContractError(f"Vector de features inválido: {text!r}") from e


def parse_fixed(items: Optional[List[str]]) -> Dict[int, float]:
    """['1=0.5', '3=2'] -> {0: 0.5, 2: 2.0}; las dimensiones se dan en base 1."""
    fixed: Dict[int, float] = {}
    for item in items or []:
        try:
            dim, value = item.split("=", 1)
            fixed[int(dim) - 1] = float(value)
        except ValueError as e:
            raise ContractError(f"--fix espera d=v, recibido {item!r}") from e
    return fixed


def _eval_columns(stored: StoredModel) -> ColumnSpec:
    if stored.columns is not None:
        return stored.columns
    if isinstance(stored.forecaster, StaticForecaster):
        return ColumnSpec(target_columns=[f"y{d}" for d in range(1, stored.forecaster.dim + 1)])
    raise ContractError("El modelo no guarda sus columnas: no se puede leer el CSV de evaluación")


def cmd_train(args: argparse.Namespace) -> int:
    config = load_train_config(_require(args.config, "--config"), seed=args.seed, out=args.out)
    columns = config.data.columns()
    dataset = load_csv(config.data.path, columns, config.data.bounds)
    arch = config.architecture.resolve(len(columns.target_columns), dataset.feature_dim, config.data.bounds)
    checkpoint_path = config.output.checkpoint
    writer = (lambda doc: save_document(checkpoint_path, doc)) if checkpoint_path else None
    try:
        forecaster, report = TrainUseCase(arch, config.training, writer, columns).run(dataset)
    except TrainingFailure as e:
        if e.checkpoint is not None and checkpoint_path:
            save_document(checkpoint_path, e.checkpoint)
        raise
    save_fitted(config.output.model, forecaster, columns)
    write_train_report(config.output.report, report)
    logger.info("Modelo escrito en %s; reporte en %s", config.output.model, config.output.report)
    print(f"best_validation_nll={report.best_validation_nll:.6f} best_epoch={report.best_epoch}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    stored = load_forecaster(_require(args.model, "--model"))
    dataset = load_csv(_require(args.data, "--data"), _eval_columns(stored))
    use_case = EvaluateUseCase(stored.forecaster, m_samples=args.m_samples, seed=args.seed or 0)
    report = use_case.run(dataset)
    _write_json(_require(args.out, "--out"), report.model_dump())
    if args.pit_out:
        write_pit(args.pit_out, use_case.pit(dataset), dataset.target_columns)
    print(report.to_table())
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    stored = load_forecaster(_require(args.model, "--model"))
    use_case = SampleUseCase(stored.forecaster, parse_vector(args.x))
    points, values = use_case.density_grid(args.grid, parse_fixed(args.fix))
    write_density_grid(_require(args.out, "--out"), points, values)
    logger.info("%d puntos de densidad escritos en %s", len(values), args.out)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    stored = load_forecaster(_require(args.model, "--model"))
    samples = SampleUseCase(stored.forecaster, parse_vector(args.x)).sample(args.n, args.seed or 0)
    write_samples(_require(args.out, "--out"), samples)
    logger.info("%d muestras escritas en %s", args.n, args.out)
    return 0


def cmd_diagnose_miso(args: argparse.Namespace) -> int:
    use_case = DiagnoseUseCase(Activation.parse(args.activation), dim=args.dim, seed=args.seed or 0,
                               trials=args.trials, hidden=args.hidden, hidden_layers=args.hidden_layers)
    report = use_case.run()
    _write_json(_require(args.out, "--out"), report.model_dump(mode="json"))
    print(report.message)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    stored = load_forecaster(_require(args.model, "--model"))
    report = VerifyUseCase(stored.forecaster, args.level, args.contexts, args.seed or 0).run()
    payload = report.model_dump()
    payload["passed"] = report.passed
    if args.out:
        _write_json(args.out, payload)
    for check in report.checks:
        print(f"{'ok   ' if check.passed else 'FALLO'} {check.name}: {check.detail}")
    if not report.passed:
        raise VerificationFailure(f"{sum(not c.passed for c in report.checks)} comprobaciones fallidas")
    return 0

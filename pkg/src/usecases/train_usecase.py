import logging
import time
from dataclasses import replace
from typing import Callable, Optional, Tuple

import numpy as np

from src.adapters.model_store import checkpoint_document, fitted_to_document
from src.domain.dataset import Dataset
from src.domain.errors import (
    ContractError, DegenerateMarginalError, EvaluationError, NonFiniteGradientError, NonFiniteLossError, TrainingFailure,
)
from src.domain.models import ConditioningNet
from src.domain.schemas import ArchitectureDescriptor, ColumnSpec, EpochRecord, TrainConfig, TrainReport
from src.services.forecaster import FittedForecaster
from src.services.hypernet import init_conditioning_net
from src.services.likelihood import loss_and_grad, nll_loss
from src.services.optimizer import Adam, clip_by_global_norm
from src.services.scaling import prepare_for_training, split_indices

logger = logging.getLogger(__name__)

NUMERICAL_FAILURES = (NonFiniteLossError, NonFiniteGradientError, DegenerateMarginalError, EvaluationError)

CheckpointWriter = Callable[[dict], None]


class TrainUseCase:
    """
    Entrenamiento por máxima verosimilitud de la hiperred con Adam, recorte de gradiente,
    barajado determinista por semilla y parada temprana sobre la NLL de validación.
    Devuelve los parámetros de la mejor época de validación.
    """
    def __init__(self, arch: ArchitectureDescriptor, config: TrainConfig,
                 checkpoint_writer: Optional[CheckpointWriter] = None, columns: Optional[ColumnSpec] = None):
        self.arch = arch
        self.config = config
        self.checkpoint_writer = checkpoint_writer
        self.columns = columns

    def _prepare(self, dataset: Dataset) -> Tuple[ArchitectureDescriptor, Dataset]:
        if dataset.target_dim != self.arch.dim:
            raise ContractError(f"El dataset tiene D={dataset.target_dim}, la arquitectura D={self.arch.dim}")
        if dataset.feature_dim != self.arch.feature_dim:
            raise ContractError(f"El dataset tiene F={dataset.feature_dim}, la arquitectura F={self.arch.feature_dim}")
        if self.arch.bounds is not None:
            dataset = replace(dataset, bounds=list(self.arch.bounds))
        dataset = prepare_for_training(dataset, self.config.validation_fraction, self.config.seed)
        return self.arch.with_bounds(dataset.bounds), dataset

    def _inside(self, part: Dataset, label: str) -> Dataset:
        mask = part.within_bounds()
        if not mask.all():
            logger.warning("%d filas de %s fuera de las cotas excluidas", int((~mask).sum()), label)
        if not mask.any():
            raise ContractError(f"Ninguna fila de {label} dentro de las cotas")
        return part.subset(np.flatnonzero(mask))

    def _checkpoint(self, net: ConditioningNet, arch: ArchitectureDescriptor, dataset: Dataset,
                    optimizer: Adam, epoch: int) -> dict:
        doc = fitted_to_document(FittedForecaster(net, arch, dataset.feature_scaling), self.columns)
        return checkpoint_document(doc, optimizer.state_dict(), epoch)

    def run(self, dataset: Dataset) -> Tuple[FittedForecaster, TrainReport]:
        cfg = self.config
        started = time.perf_counter()
        arch, dataset = self._prepare(dataset)
        if len(dataset) < 10 * cfg.batch_size:
            logger.warning("Dataset pequeño: %d filas para batch_size=%d (se recomiendan >= %d)",
                           len(dataset), cfg.batch_size, 10 * cfg.batch_size)

        train_idx, val_idx = split_indices(len(dataset), cfg.validation_fraction, cfg.seed)
        train, val = dataset.split(train_idx, val_idx)
        train, val = self._inside(train, "entrenamiento"), self._inside(val, "validación")
        x_train, y_train = train.scaled_features(), train.targets
        val_batch = (val.scaled_features(), val.targets)

        rng = np.random.default_rng(cfg.seed)
        net = init_conditioning_net(arch, cfg.seed)
        params = net.parameters()
        optimizer = Adam(params, learning_rate=cfg.learning_rate)
        report = TrainReport()
        best_net, best_val, waited = net, float("inf"), 0
        last_good: Optional[dict] = None

        for epoch in range(1, cfg.max_epochs + 1):
            order = rng.permutation(len(train))
            total, seen, skipped = 0.0, 0, 0
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                try:
                    loss, grads = loss_and_grad(net, arch, (x_train[idx], y_train[idx]), cfg.chunk_size)
                except NUMERICAL_FAILURES as e:
                    logger.warning("Época %d: lote omitido (%s)", epoch, e)
                    skipped += 1
                    continue
                grads, _ = clip_by_global_norm(grads, cfg.grad_clip)
                params = optimizer.step(params, grads)
                net = net.with_parameters(params)
                total += loss * len(idx)
                seen += len(idx)
            report.skipped_batches += skipped
            if seen == 0:
                raise TrainingFailure(f"Todos los lotes de la época {epoch} fueron no finitos", checkpoint=last_good)

            train_nll = total / seen
            try:
                val_nll = nll_loss(net, arch, val_batch, cfg.chunk_size)
            except NUMERICAL_FAILURES as e:
                logger.warning("Época %d: NLL de validación no finita (%s)", epoch, e)
                val_nll = float("inf")
            report.epochs.append(EpochRecord(epoch=epoch, train_nll=train_nll, val_nll=val_nll))
            logger.info("epoch=%d train_nll=%.6f val_nll=%.6f", epoch, train_nll, val_nll)

            if val_nll < best_val:
                best_net, best_val, waited = net, val_nll, 0
                report.best_epoch = epoch
                last_good = self._checkpoint(net, arch, dataset, optimizer, epoch)
                if self.checkpoint_writer is not None:
                    self.checkpoint_writer(last_good)
            else:
                waited += 1
            report.stopped_epoch = epoch
            if waited >= cfg.patience:
                logger.info("Parada temprana en la época %d (mejor: %d)", epoch, report.best_epoch)
                break

        if not np.isfinite(best_val):
            raise TrainingFailure("La NLL de validación nunca fue finita", checkpoint=last_good)
        report.best_validation_nll = best_val
        report.wall_time = time.perf_counter() - started
        return FittedForecaster(best_net, arch, dataset.feature_scaling), report

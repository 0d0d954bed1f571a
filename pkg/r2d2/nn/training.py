"""
Mini-batch training loop.

Given a seed, the shuffle order and the initial weights are fixed, so two
runs produce bit-identical logs and parameters. With workers > 1 each batch
is split into contiguous shards whose gradients are computed concurrently
and summed in shard order.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator

from r2d2.config import VALID_OPTIMIZERS
from r2d2.exceptions import DivergedLossError, SingleClassDatasetError
from r2d2.nn.layers import Params
from r2d2.nn.network import Network
from r2d2.nn.optimizers import Optimizer, get_optimizer
from r2d2.observability import StageTimer, logger
from r2d2.observability.metrics import training_epoch_total
from r2d2.pixel import RgbImage, to_network_input


LabeledImage = Tuple[RgbImage, int]


class TrainConfig(BaseModel):
    """Training hyper-parameters."""
    epochs: int = Field(default=30, ge=1)
    batch_size: int = Field(default=32, ge=1)
    optimizer: str = "sgd"
    learning_rate: float = Field(default=0.01, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    rho: float = Field(default=0.95, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    seed: int = 42
    workers: int = Field(default=1, ge=1)

    @field_validator("optimizer")
    @classmethod
    def validate_optimizer(cls, v):
        if v.lower() not in VALID_OPTIMIZERS:
            raise ValueError(f"optimizer must be one of: {VALID_OPTIMIZERS}")
        return v.lower()

    def build_optimizer(self) -> Optimizer:
        return get_optimizer(
            self.optimizer,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            rho=self.rho,
            eps=self.eps,
        )


class EpochLog(BaseModel):
    """One row of the training log."""
    epoch: int
    loss: float
    train_acc: float
    eval_acc: Optional[float] = None


class TrainingResult(BaseModel):
    """Trained network and its per-epoch log."""
    model_config = {"arbitrary_types_allowed": True}

    network: Network
    log: List[EpochLog]


def _stack(dataset: Sequence[LabeledImage], size: int) -> Tuple[np.ndarray, np.ndarray]:
    images = [image for image, _ in dataset]
    labels = np.array([label for _, label in dataset], dtype=np.int64)
    return to_network_input(images, size), labels


def accuracy(network: Network, x: np.ndarray, labels: np.ndarray, batch_size: int = 64) -> float:
    """Fraction of samples whose arg-max class equals the label."""
    correct = 0
    for start in range(0, len(labels), batch_size):
        probs = network.predict_proba(x[start:start + batch_size])
        correct += int((probs.argmax(axis=1) == labels[start:start + batch_size]).sum())
    return correct / len(labels)


def _batch_gradients(
    network: Network,
    params: Params,
    x: np.ndarray,
    labels: np.ndarray,
    workers: int,
    pool: Optional[ThreadPoolExecutor]
) -> Tuple[float, Params]:
    if pool is None or workers == 1 or len(labels) < 2:
        loss, grads, _ = network.loss_and_grads(x, labels, params)
        return loss, grads

    shards = [s for s in np.array_split(np.arange(len(labels)), workers) if len(s)]
    futures = [pool.submit(network.loss_and_grads, x[s], labels[s], params) for s in shards]
    total = len(labels)
    loss = 0.0
    grads: Params = {}
    for shard, future in zip(shards, futures):
        shard_loss, shard_grads, _ = future.result()
        weight = len(shard) / total
        loss += weight * shard_loss
        for name, grad in shard_grads.items():
            scaled = grad * np.asarray(weight, dtype=grad.dtype)
            if name in grads:
                grads[name] += scaled
            else:
                grads[name] = scaled
    return loss, grads


def train(
    network: Network,
    dataset: Sequence[LabeledImage],
    config: Optional[TrainConfig] = None,
    eval_set: Optional[Sequence[LabeledImage]] = None
) -> TrainingResult:
    """
    Train a network in place with softmax cross-entropy.

    Images are resized to the network input size by nearest neighbour.

    Args:
        network: Network to train (its params are updated)
        dataset: (image, class index) pairs
        config: Training hyper-parameters
        eval_set: Optional held-out pairs scored after every epoch

    Returns:
        TrainingResult with one EpochLog per epoch

    Raises:
        SingleClassDatasetError: If the dataset is empty or has one class
        DivergedLossError: If the loss becomes NaN or infinite
    """
    config = config or TrainConfig()
    if not dataset:
        raise SingleClassDatasetError("Training set is empty")
    size = network.config.input_size
    x, labels = _stack(dataset, size)
    if len(np.unique(labels)) < 2:
        raise SingleClassDatasetError(f"Training set has a single class: {int(labels[0])}")

    eval_x = eval_labels = None
    if eval_set:
        eval_x, eval_labels = _stack(eval_set, size)

    optimizer = config.build_optimizer()
    rng = np.random.default_rng(config.seed)
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    log: List[EpochLog] = []

    logger.info(
        "training_started",
        samples=len(labels),
        optimizer=config.optimizer,
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        batch_size=config.batch_size,
        parameters=network.parameter_count,
    )

    try:
        for epoch in range(1, config.epochs + 1):
            with StageTimer("train_epoch") as timer:
                order = rng.permutation(len(labels))
                loss_sum = 0.0
                for start in range(0, len(order), config.batch_size):
                    idx = order[start:start + config.batch_size]
                    params = optimizer.evaluation_params(network.params)
                    loss, grads = _batch_gradients(
                        network, params, x[idx], labels[idx], config.workers, pool)
                    if not np.isfinite(loss):
                        raise DivergedLossError(f"Loss diverged at epoch {epoch}: {loss}")
                    optimizer.step(network.params, grads)
                    loss_sum += loss * len(idx)

                entry = EpochLog(
                    epoch=epoch,
                    loss=loss_sum / len(labels),
                    train_acc=accuracy(network, x, labels),
                    eval_acc=accuracy(network, eval_x, eval_labels) if eval_x is not None else None,
                )
            log.append(entry)
            training_epoch_total.labels(optimizer=config.optimizer).inc()
            logger.info(
                "epoch_completed",
                epoch=epoch,
                loss=round(entry.loss, 6),
                train_acc=entry.train_acc,
                eval_acc=entry.eval_acc,
                duration_ms=round(timer.elapsed_ms, 1),
            )
    finally:
        if pool is not None:
            pool.shutdown()

    return TrainingResult(network=network, log=log)


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.6f}"


def write_training_log(log: Sequence[EpochLog], path: Union[str, Path]) -> Path:
    """Write the log as CSV: epoch, loss, train_acc, eval_acc."""
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["epoch", "loss", "train_acc", "eval_acc"])
        for entry in log:
            writer.writerow([entry.epoch, _fmt(entry.loss), _fmt(entry.train_acc), _fmt(entry.eval_acc)])
    return path

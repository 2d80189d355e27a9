from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, TextIO, Union
import logging
import os

import numpy as np
import pandas as pd

from ..config import check_positive, default_seed
from ..core.serialization import JsonSerializable
from ..errors import InvalidInput
from ..nn.optim import Adadelta
from .loss import LAMBDA_COORD, LAMBDA_NOOBJ, detection_loss
from .model import DetectorArchitecture, DetectorModel, predicted_labels

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("epoch", "train_loss", "val_loss", "val_cls_acc", "val_win_acc")


@dataclass(frozen=True)
class TrainConfig(JsonSerializable):
    """
    Optimiser and loop settings.

    Attributes:
        learning_rate (float): Adadelta update scale.
        rho (float): Adadelta decay.
        epsilon (float): Adadelta numerical floor.
        weight_decay (float): L2 coefficient added to the gradients.
        epochs (int): Passes over the training split.
        batch_size (int): Samples per update.
        lambda_coord (float): Weight of the width loss.
        lambda_noobj (float): Weight of the non-responsible confidence loss.
        seed (int): Seeds weight initialisation and batch shuffling.
    """

    learning_rate: float = 0.001
    rho: float = 0.95
    epsilon: float = 1e-7
    weight_decay: float = 0.0005
    epochs: int = 4000
    batch_size: int = 64
    lambda_coord: float = LAMBDA_COORD
    lambda_noobj: float = LAMBDA_NOOBJ
    seed: int = field(default_factory=default_seed)

    def __post_init__(self):
        check_positive(
            type(self).__name__,
            learning_rate=self.learning_rate,
            rho=self.rho,
            epsilon=self.epsilon,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lambda_coord=self.lambda_coord,
            lambda_noobj=self.lambda_noobj,
        )
        if self.weight_decay < 0:
            raise InvalidInput(
                f"weight_decay must be non-negative, got {self.weight_decay}"
            )

    def optimizer(self) -> Adadelta:
        return Adadelta(self.learning_rate, self.rho, self.epsilon, self.weight_decay)


@dataclass(frozen=True)
class DetectionArrays:
    """
    Stacked inputs and labels of one split.

    Attributes:
        inputs (np.ndarray): GAF tensors, shape (N, 4, 16, 16).
        class_indices (np.ndarray): Zero-based class per sample.
        window_sizes (np.ndarray): Window size per sample.
    """

    inputs: np.ndarray
    class_indices: np.ndarray
    window_sizes: np.ndarray

    def __post_init__(self):
        n = len(self.inputs)
        if len(self.class_indices) != n or len(self.window_sizes) != n:
            raise InvalidInput("Inputs and labels must have the same length")

    def __len__(self) -> int:
        return len(self.inputs)

    @classmethod
    def from_records(cls, records: Sequence, split=None) -> "DetectionArrays":
        """Stack `SampleRecord`s, optionally only those of one `Split`."""
        chosen = [r for r in records if split is None or r.split == split]
        if not chosen:
            none = np.zeros(0, np.int64)
            return cls(np.zeros((0, 4, 16, 16)), none, none.copy())
        return cls(
            np.stack([r.tensor.channels for r in chosen]),
            np.array([r.sample.pattern_class.index for r in chosen], dtype=np.int64),
            np.array([r.sample.window_size for r in chosen], dtype=np.int64),
        )

    def take(self, indices) -> "DetectionArrays":
        return DetectionArrays(
            self.inputs[indices],
            self.class_indices[indices],
            self.window_sizes[indices],
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_cls_acc: float
    val_win_acc: float
    train_cls_acc: float


class TrainingLog:
    """Per-epoch metrics, exportable as `epoch,train_loss,val_loss,val_cls_acc,val_win_acc` CSV."""

    def __init__(self):
        self.records: List[EpochRecord] = []

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index) -> EpochRecord:
        return self.records[index]

    @property
    def best_epoch(self) -> Optional[int]:
        """First epoch with the lowest validation loss."""
        if not self.records:
            return None
        return min(self.records, key=lambda r: (r.val_loss, r.epoch)).epoch

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[getattr(r, c) for c in LOG_COLUMNS] for r in self.records],
            columns=list(LOG_COLUMNS),
        )

    def to_csv(self, path_or_file: Union[str, os.PathLike, TextIO]) -> None:
        self.to_dataframe().to_csv(path_or_file, index=False, lineterminator="\n")


@dataclass
class TrainResult:
    """The model restored to its best validation epoch, and the full log."""

    model: DetectorModel
    log: TrainingLog


def _batches(count: int, batch_size: int, order: np.ndarray) -> List[np.ndarray]:
    # batch norm cannot train on a single sample, so a trailing singleton joins the previous batch
    chunks = [order[i : i + batch_size] for i in range(0, count, batch_size)]
    if len(chunks) > 1 and len(chunks[-1]) == 1:
        chunks[-2] = np.concatenate([chunks[-2], chunks.pop()])
    return chunks


def score(
    model: DetectorModel, data: DetectionArrays, cfg: TrainConfig, batch_size: int = 256
):
    """
    Loss and accuracies of a model on a split, in inference mode.

    Returns:
        Tuple[float, float, float]: Sample-mean loss, class accuracy, exact window accuracy.
    """
    total = 0.0
    cls_hits = 0
    win_hits = 0
    for start in range(0, len(data), batch_size):
        part = data.take(slice(start, start + batch_size))
        raw = model.forward(part.inputs, training=False)
        terms = detection_loss(
            raw,
            part.class_indices,
            part.window_sizes,
            cfg.lambda_coord,
            cfg.lambda_noobj,
        )
        total += terms.total * len(part)
        classes, sizes = predicted_labels(raw)
        cls_hits += int(np.sum(classes == part.class_indices))
        win_hits += int(np.sum(sizes == part.window_sizes))
    n = len(data)
    return total / n, cls_hits / n, win_hits / n


def train(
    train_data: DetectionArrays,
    val_data: DetectionArrays,
    cfg: Optional[TrainConfig] = None,
    architecture: Optional[DetectorArchitecture] = None,
    model: Optional[DetectorModel] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """
    Train the detector with Adadelta and keep the best validation checkpoint.

    Every epoch shuffles the training split with a seeded generator, takes one update per
    batch, then scores the validation split in inference mode.

    Args:
        train_data (DetectionArrays): Training split.
        val_data (DetectionArrays): Validation split.
        cfg (Optional[TrainConfig]): Loop and optimiser settings.
        architecture (Optional[DetectorArchitecture]): Used when no model is given.
        model (Optional[DetectorModel]): A model to continue training.
        on_epoch (Optional[Callable[[EpochRecord], None]]): Called after every epoch.

    Returns:
        TrainResult: The model restored to its lowest validation loss, and the log.

    Raises:
        InvalidInput: If a split is empty or the training split holds a single sample.
    """
    cfg = cfg or TrainConfig()
    if len(train_data) == 0 or len(val_data) == 0:
        raise InvalidInput("Training needs non-empty train and validation splits")
    if len(train_data) < 2:
        raise InvalidInput("Batch norm needs at least 2 training samples")
    init_seed, shuffle_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    model = model or DetectorModel(architecture, seed=init_seed)
    rng = np.random.default_rng(shuffle_seed)
    optimizer = cfg.optimizer()
    log = TrainingLog()
    best_loss = np.inf
    best_state = model.state_dict()
    report_every = max(1, cfg.epochs // 20)

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_data))
        loss_sum = 0.0
        hits = 0
        for indices in _batches(len(train_data), cfg.batch_size, order):
            batch = train_data.take(indices)
            raw = model.forward(batch.inputs, training=True)
            terms = detection_loss(
                raw,
                batch.class_indices,
                batch.window_sizes,
                cfg.lambda_coord,
                cfg.lambda_noobj,
            )
            model.backward(terms.grad)
            optimizer.step(model.parameters(), model.gradients())
            loss_sum += terms.total * len(batch)
            hits += int(np.sum(predicted_labels(raw)[0] == batch.class_indices))
        val_loss, val_cls, val_win = score(model, val_data, cfg)
        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / len(train_data),
            val_loss=val_loss,
            val_cls_acc=val_cls,
            val_win_acc=val_win,
            train_cls_acc=hits / len(train_data),
        )
        log.append(record)
        if val_loss < best_loss:
            best_loss = val_loss
            best_state = model.state_dict()
        logger.debug("%s", record)
        if epoch % report_every == 0 or epoch == cfg.epochs:
            logger.info(
                "epoch %d/%d train_loss %.4f val_loss %.4f "
                "val_cls_acc %.3f val_win_acc %.3f",
                epoch,
                cfg.epochs,
                record.train_loss,
                val_loss,
                val_cls,
                val_win,
            )
        if on_epoch is not None:
            on_epoch(record)

    model.load_state_dict(best_state)
    logger.info(
        "Restored best validation epoch %d (loss %.4f)", log.best_epoch, best_loss
    )
    return TrainResult(model, log)

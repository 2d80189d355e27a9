from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union
import io
import json
import logging
import os

import numpy as np
import pandas as pd

from ..core.patterns import N_CLASSES, PatternClass
from ..core.samples import MIN_WINDOW, WINDOW
from ..core.serialization import JsonSerializable
from ..core.utils import convert_non_json_serializable_types
from ..detector.model import DetectorModel, predicted_labels
from ..errors import InvalidInput, ShapeError

logger = logging.getLogger(__name__)

WINDOW_LABELS = tuple(range(MIN_WINDOW, WINDOW + 1))


@dataclass(frozen=True)
class EvalReport(JsonSerializable):
    """
    Classification and window-size figures of one evaluated split.

    Attributes:
        n_samples (int): Samples evaluated.
        class_counts (Dict[str, int]): Samples per true class, keyed by display name.
        per_class_accuracy (Dict[str, Optional[float]]): One-vs-all accuracy per class;
            None for classes absent from the split.
        macro_accuracy (float): Arithmetic mean of the per-class accuracies present.
        weighted_accuracy (float): Sample-weighted classification accuracy.
        window_accuracy (float): Fraction with the exact window size.
        window_within_one_accuracy (float): Fraction with the window size off by at most 1.
        window_confusion (List[List[int]]): 12 x 12 counts, rows true size 5..16,
            columns predicted size 5..16.
    """

    n_samples: int
    class_counts: Dict[str, int]
    per_class_accuracy: Dict[str, Optional[float]]
    macro_accuracy: float
    weighted_accuracy: float
    window_accuracy: float
    window_within_one_accuracy: float
    window_confusion: List[List[int]]

    _casters = {"window_confusion": lambda rows: [list(r) for r in rows]}

    def confusion_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.window_confusion,
            index=pd.Index(WINDOW_LABELS, name="true"),
            columns=pd.Index(WINDOW_LABELS, name="predicted"),
        )

    def confusion_to_csv(self, path_or_file: Union[str, os.PathLike, TextIO]) -> None:
        """Write the window-size confusion matrix, true sizes down the first column."""
        self.confusion_dataframe().to_csv(path_or_file, lineterminator="\n")

    def accuracy_table(self) -> pd.DataFrame:
        rows = [
            (name, self.class_counts[name], self.per_class_accuracy[name])
            for name in self.per_class_accuracy
        ]
        rows.append(("Avg", self.n_samples, self.macro_accuracy))
        return pd.DataFrame(rows, columns=["class", "samples", "accuracy"]).set_index(
            "class"
        )

    def to_text(self) -> str:
        """The report as sorted JSON followed by the per-class table and the confusion matrix."""
        summary = json.dumps(
            self.to_dict(),
            indent=2,
            sort_keys=True,
            default=convert_non_json_serializable_types,
        )
        buffer = io.StringIO()
        buffer.write(summary + "\n\n")
        buffer.write(self.accuracy_table().to_string(float_format=lambda v: f"{v:.4f}"))
        buffer.write("\n\nwindow size confusion (rows true, columns predicted)\n")
        buffer.write(self.confusion_dataframe().to_string())
        buffer.write("\n")
        return buffer.getvalue()


def window_confusion(true_sizes, pred_sizes) -> np.ndarray:
    """12 x 12 counts of (true, predicted) window sizes, both in [5, 16]."""
    true_sizes = np.asarray(true_sizes, dtype=np.int64)
    pred_sizes = np.asarray(pred_sizes, dtype=np.int64)
    for sizes in (true_sizes, pred_sizes):
        if np.any(sizes < MIN_WINDOW) or np.any(sizes > WINDOW):
            raise InvalidInput(f"Window sizes must lie in [{MIN_WINDOW}, {WINDOW}]")
    matrix = np.zeros((len(WINDOW_LABELS), len(WINDOW_LABELS)), dtype=np.int64)
    np.add.at(matrix, (true_sizes - MIN_WINDOW, pred_sizes - MIN_WINDOW), 1)
    return matrix


def evaluate_predictions(
    true_classes: Sequence[int],
    true_sizes: Sequence[int],
    pred_classes: Sequence[int],
    pred_sizes: Sequence[int],
) -> EvalReport:
    """
    Score predicted labels against the truth.

    Args:
        true_classes: Zero-based true classes (PatternClass.index).
        true_sizes: True window sizes.
        pred_classes: Zero-based predicted classes.
        pred_sizes: Predicted window sizes.

    Returns:
        EvalReport: The figures of the split.

    Raises:
        InvalidInput: If there are no samples or a label is out of range.
        ShapeError: If the four sequences differ in length.
    """
    true_classes = np.asarray(true_classes, dtype=np.int64)
    pred_classes = np.asarray(pred_classes, dtype=np.int64)
    true_sizes = np.asarray(true_sizes, dtype=np.int64)
    pred_sizes = np.asarray(pred_sizes, dtype=np.int64)
    n = len(true_classes)
    if n == 0:
        raise InvalidInput("Cannot evaluate an empty split")
    if not len(pred_classes) == len(true_sizes) == len(pred_sizes) == n:
        raise ShapeError("Predictions and labels must have the same length")
    for classes in (true_classes, pred_classes):
        if np.any(classes < 0) or np.any(classes >= N_CLASSES):
            raise InvalidInput(f"Class indices must lie in [0, {N_CLASSES})")

    correct = true_classes == pred_classes
    class_counts = {}
    per_class = {}
    for cls in PatternClass:
        mask = true_classes == cls.index
        class_counts[cls.display_name] = int(mask.sum())
        per_class[cls.display_name] = (
            float(correct[mask].mean()) if mask.any() else None
        )
    present = [acc for acc in per_class.values() if acc is not None]
    confusion = window_confusion(true_sizes, pred_sizes)
    report = EvalReport(
        n_samples=n,
        class_counts=class_counts,
        per_class_accuracy=per_class,
        macro_accuracy=float(np.mean(present)),
        weighted_accuracy=float(correct.mean()),
        window_accuracy=float(np.trace(confusion) / n),
        window_within_one_accuracy=float(np.mean(np.abs(true_sizes - pred_sizes) <= 1)),
        window_confusion=confusion.tolist(),
    )
    logger.info(
        "Evaluated %d samples: macro accuracy %.4f, window accuracy %.4f",
        n,
        report.macro_accuracy,
        report.window_accuracy,
    )
    return report


def predict_labels(
    model: DetectorModel, inputs: np.ndarray, batch_size: int = 256
) -> Tuple[np.ndarray, np.ndarray]:
    """Predicted class indices and window sizes for stacked GAF tensors, in inference mode."""
    classes = []
    sizes = []
    for start in range(0, len(inputs), batch_size):
        raw = model.forward(inputs[start : start + batch_size], training=False)
        batch_classes, batch_sizes = predicted_labels(raw)
        classes.append(batch_classes)
        sizes.append(batch_sizes)
    return np.concatenate(classes), np.concatenate(sizes)


def evaluate(
    model: DetectorModel, records: Sequence, batch_size: int = 256
) -> EvalReport:
    """
    Run the model over stored samples and score it.

    Args:
        model (DetectorModel): A trained detector.
        records (Sequence[SampleRecord]): The samples of one split.
        batch_size (int): Samples per forward pass.

    Returns:
        EvalReport: The figures of the split.

    Raises:
        InvalidInput: If `records` is empty.
    """
    if len(records) == 0:
        raise InvalidInput("Cannot evaluate an empty split")
    inputs = np.stack([r.tensor.channels for r in records])
    pred_classes, pred_sizes = predict_labels(model, inputs, batch_size)
    return evaluate_predictions(
        [r.sample.pattern_class.index for r in records],
        [r.sample.window_size for r in records],
        pred_classes,
        pred_sizes,
    )

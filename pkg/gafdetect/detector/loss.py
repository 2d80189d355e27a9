"""
Single-cell detection loss.

With a 1 x 1 grid and the box always anchored at the last bar, each prediction is a width,
a confidence and a class. Of the two (w, c) pairs, the one whose width overlaps the true
width best is responsible for the object:

    loss = lambda_coord * (sqrt(w_resp) - sqrt(w_true / 16))^2
         + (c_resp - iou(16 * w_resp, w_true))^2
         + lambda_noobj * c_other^2
         + cross-entropy(class logits, true class)

averaged over the batch. Gradients are taken with respect to the raw head values.
"""

from dataclasses import dataclass

import numpy as np

from ..core.patterns import N_CLASSES
from ..core.samples import WINDOW, LabeledSample
from ..errors import InvalidInput, ShapeError
from ..nn.functional import log_softmax, sigmoid
from .model import BOX_OUTPUTS, N_OUTPUTS

LAMBDA_COORD = 5.0
LAMBDA_NOOBJ = 0.5


def iou_1d(w_pred, w_true):
    """
    Intersection over union of two intervals anchored at the same right edge.

    Args:
        w_pred: Predicted width(s) in bars, positive.
        w_true: True width(s) in bars, positive.

    Returns:
        min(w_pred, w_true) / max(w_pred, w_true), as a float for scalar inputs.

    Raises:
        InvalidInput: If a width is not positive.
    """
    p = np.asarray(w_pred, dtype=np.float64)
    t = np.asarray(w_true, dtype=np.float64)
    if np.any(p <= 0) or np.any(t <= 0):
        raise InvalidInput("Interval widths must be positive")
    iou = np.minimum(p, t) / np.maximum(p, t)
    return float(iou) if iou.ndim == 0 else iou


def _iou_slope(w_norm: np.ndarray, w_true: np.ndarray) -> np.ndarray:
    # d iou(16 w, W) / d w, taken as 0 at the kink
    bars = WINDOW * w_norm
    below = WINDOW / w_true
    above = -WINDOW * w_true / (bars * bars)
    return np.where(bars < w_true, below, np.where(bars > w_true, above, 0.0))


@dataclass(frozen=True)
class LossTerms:
    """
    Batch-mean loss terms and the gradient of their sum.

    Attributes:
        coord (float): Weighted width term.
        conf_obj (float): Confidence term of the responsible pair.
        conf_noobj (float): Weighted confidence term of the other pair.
        cls (float): Class cross-entropy.
        grad (np.ndarray): d total / d raw outputs, shape (B, 12).
        responsible (np.ndarray): Responsible pair index per sample.
    """

    coord: float
    conf_obj: float
    conf_noobj: float
    cls: float
    grad: np.ndarray
    responsible: np.ndarray

    @property
    def total(self) -> float:
        return self.coord + self.conf_obj + self.conf_noobj + self.cls


def responsible_pairs(w_norm: np.ndarray, window_sizes: np.ndarray) -> np.ndarray:
    """Index of the pair whose width has the higher IoU with the truth; ties go to pair 0."""
    iou0 = iou_1d(WINDOW * w_norm[:, 0], window_sizes)
    iou1 = iou_1d(WINDOW * w_norm[:, 1], window_sizes)
    return np.where(iou1 > iou0, 1, 0)


def detection_loss(
    raw: np.ndarray,
    class_indices,
    window_sizes,
    lambda_coord: float = LAMBDA_COORD,
    lambda_noobj: float = LAMBDA_NOOBJ,
) -> LossTerms:
    """
    Loss of a batch of raw head values against their labels.

    Args:
        raw (np.ndarray): Raw outputs, shape (B, 12) or (12,).
        class_indices: True class per sample, zero-based (PatternClass.index).
        window_sizes: True window size per sample, in bars.
        lambda_coord (float): Weight of the width term.
        lambda_noobj (float): Weight of the non-responsible confidence term.

    Returns:
        LossTerms: Batch-mean terms and the gradient with respect to `raw`.

    Raises:
        ShapeError: If the shapes disagree.
        InvalidInput: If a label is out of range.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    classes = np.atleast_1d(np.asarray(class_indices, dtype=np.int64))
    sizes = np.atleast_1d(np.asarray(window_sizes, dtype=np.float64))
    batch = raw.shape[0]
    labels_match = classes.shape == (batch,) and sizes.shape == (batch,)
    if raw.shape[1] != N_OUTPUTS or not labels_match:
        raise ShapeError(
            f"Loss expects raw (B, {N_OUTPUTS}) with B labels, got {raw.shape}, "
            f"{classes.shape}, {sizes.shape}"
        )
    if np.any(classes < 0) or np.any(classes >= N_CLASSES) or np.any(sizes <= 0):
        raise InvalidInput(
            "Class indices must lie in [0, 8) and window sizes be positive"
        )

    rows = np.arange(batch)
    squashed = sigmoid(raw[:, :BOX_OUTPUTS])
    w_norm = squashed[:, [0, 2]]
    conf = squashed[:, [1, 3]]
    resp = responsible_pairs(w_norm, sizes)
    other = 1 - resp
    w_resp = w_norm[rows, resp]
    c_resp = conf[rows, resp]
    c_other = conf[rows, other]
    iou_resp = iou_1d(WINDOW * w_resp, sizes)
    target_norm = sizes / WINDOW

    sqrt_w = np.sqrt(np.maximum(w_resp, 1e-300))
    coord_err = sqrt_w - np.sqrt(target_norm)
    conf_err = c_resp - iou_resp
    logp = log_softmax(raw[:, BOX_OUTPUTS:], axis=1)

    coord = lambda_coord * coord_err**2
    conf_obj = conf_err**2
    conf_noobj = lambda_noobj * c_other**2
    cls = -logp[rows, classes]

    d_w_resp = lambda_coord * coord_err / sqrt_w
    d_w_resp -= 2 * conf_err * _iou_slope(w_resp, sizes)
    d_c_resp = 2 * conf_err
    d_c_other = 2 * lambda_noobj * c_other
    d_squashed = np.zeros((batch, BOX_OUTPUTS))
    d_squashed[rows, 2 * resp] = d_w_resp
    d_squashed[rows, 2 * resp + 1] = d_c_resp
    d_squashed[rows, 2 * other + 1] = d_c_other
    grad = np.empty_like(raw)
    grad[:, :BOX_OUTPUTS] = d_squashed * squashed * (1 - squashed)
    probs = np.exp(logp)
    probs[rows, classes] -= 1.0
    grad[:, BOX_OUTPUTS:] = probs
    grad /= batch

    return LossTerms(
        coord=float(coord.mean()),
        conf_obj=float(conf_obj.mean()),
        conf_noobj=float(conf_noobj.mean()),
        cls=float(cls.mean()),
        grad=grad,
        responsible=resp,
    )


def sample_loss(raw: np.ndarray, target: LabeledSample, **weights) -> LossTerms:
    """`detection_loss` of one sample's raw outputs against its label."""
    return detection_loss(
        np.asarray(raw).reshape(1, -1),
        [target.pattern_class.index],
        [target.window_size],
        **weights,
    )

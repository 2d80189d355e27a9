"""
Gramian Angular Field encoding.

A series is min-max scaled to [0, 1], mapped to angles phi = arccos(x), and encoded as the
matrix G[i, j] = cos(phi_i + phi_j). The diagonal G[i, i] = 2 x_i^2 - 1 keeps the time order
from top-left to bottom-right and inverts uniquely back to the scaled series.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from pyts.image import GramianAngularField

from ..core.candles import OhlcSeries
from ..core.patterns import FeatureSet
from ..core.samples import WINDOW
from ..errors import InvalidInput, ShapeError

TOLERANCE = 1e-9


def minmax_normalize(x, axis: int = -1) -> np.ndarray:
    """
    Scale a series (or a stack of series along `axis`) to [0, 1].

    A constant series maps to 0.5 everywhere.

    Args:
        x (array-like): The raw values.
        axis (int): The time axis.

    Returns:
        np.ndarray: Values in [0, 1], same shape as `x`.

    Raises:
        InvalidInput: If the series is empty.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise InvalidInput("Cannot normalize an empty series")
    low = x.min(axis=axis, keepdims=True)
    high = x.max(axis=axis, keepdims=True)
    span = high - low
    flat = span == 0
    scaled = (x - low) / np.where(flat, 1.0, span)
    return np.where(flat, 0.5, scaled)


def _check_unit_interval(x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        raise InvalidInput("Cannot encode an empty series")
    if np.any(~np.isfinite(x)) or np.any(x < -TOLERANCE) or np.any(x > 1 + TOLERANCE):
        raise InvalidInput("GAF input values must lie in [0, 1]")
    return np.clip(x, 0.0, 1.0)


def gaf_encode(x) -> np.ndarray:
    """
    Encode normalized series as Gramian Angular (summation) Fields with pyts.

    The series are already scaled, so pyts gets `sample_range=None` and no resampling.

    Args:
        x (array-like): Values in [0, 1] along the last axis; leading axes are batch axes.

    Returns:
        np.ndarray: Shape `x.shape + (n,)`; each trailing n x n block is symmetric with entries in [-1, 1].

    Raises:
        InvalidInput: If a value lies outside [0, 1] beyond a 1e-9 tolerance.
    """
    x = _check_unit_interval(np.asarray(x, dtype=np.float64))
    if x.ndim == 0:
        raise ShapeError("GAF input needs a time axis")
    n = x.shape[-1]
    gaf = GramianAngularField(image_size=n, sample_range=None, method="summation")
    images = gaf.fit_transform(x.reshape(-1, n))
    return images.reshape(x.shape + (n,))


def gaf_encode_angular(x) -> np.ndarray:
    """The angular form cos(arccos x_i + arccos x_j) of `gaf_encode`."""
    x = _check_unit_interval(np.asarray(x, dtype=np.float64))
    phi = np.arccos(x)
    return np.cos(phi[..., :, None] + phi[..., None, :])


def gaf_decode_diagonal(g) -> np.ndarray:
    """
    Recover the normalized series from a GAF matrix's diagonal.

    Args:
        g (array-like): One GAF matrix, or a stack of them along leading axes.

    Returns:
        np.ndarray: The series x_i = sqrt((g_ii + 1) / 2).

    Raises:
        InvalidInput: If a diagonal entry lies outside [-1, 1] beyond a 1e-9 tolerance.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
        raise ShapeError(f"Expected square matrices, got shape {g.shape}")
    diagonal = np.diagonal(g, axis1=-2, axis2=-1)
    if np.any(diagonal < -1 - TOLERANCE) or np.any(diagonal > 1 + TOLERANCE):
        raise InvalidInput("GAF diagonal entries must lie in [-1, 1]")
    return np.sqrt((np.clip(diagonal, -1.0, 1.0) + 1.0) / 2.0)


def window_features(
    window: OhlcSeries, feature_set: Union[FeatureSet, str]
) -> np.ndarray:
    """
    The four feature series of a window as a (4, n) array.

    OHLC yields open, high, low, close; CULR yields close, upper shadow, lower shadow, real body.
    """
    feature_set = FeatureSet.parse(feature_set)
    columns = window.ohlc() if feature_set is FeatureSet.OHLC else window.culr()
    return np.ascontiguousarray(columns.T)


def encode_features(features) -> np.ndarray:
    """
    Normalize each feature series independently and encode it.

    Args:
        features (array-like): Shape (..., C, n).

    Returns:
        np.ndarray: Shape (..., C, n, n).
    """
    return gaf_encode(minmax_normalize(features, axis=-1))


@dataclass(frozen=True)
class GafTensor:
    """
    A stack of GAF matrices, one channel per feature series.

    Attributes:
        channels (np.ndarray): Shape (C, n, n).
        feature_set (FeatureSet): Which feature series produced the channels.
    """

    channels: np.ndarray
    feature_set: FeatureSet

    def __post_init__(self):
        if self.channels.ndim != 3 or self.channels.shape[1] != self.channels.shape[2]:
            raise ShapeError(f"GAF tensor must be (C, n, n), got {self.channels.shape}")

    @property
    def n(self) -> int:
        return self.channels.shape[-1]


def encode_window(
    window: OhlcSeries, feature_set: Union[FeatureSet, str] = FeatureSet.OHLC
) -> GafTensor:
    """
    Encode a 16-candle window as a four-channel GAF tensor.

    Args:
        window (OhlcSeries): Exactly 16 candles.
        feature_set (Union[FeatureSet, str]): OHLC or CULR.

    Returns:
        GafTensor: Four 16 x 16 channels.

    Raises:
        InvalidInput: If the window does not hold exactly 16 candles.
    """
    if len(window) != WINDOW:
        raise InvalidInput(f"encode_window needs {WINDOW} candles, got {len(window)}")
    feature_set = FeatureSet.parse(feature_set)
    return GafTensor(encode_features(window_features(window, feature_set)), feature_set)


def encode_batch(
    windows: np.ndarray, feature_set: Union[FeatureSet, str]
) -> np.ndarray:
    """
    Encode many windows at once.

    Args:
        windows (np.ndarray): Shape (M, n, 4) with columns open, high, low, close.
        feature_set (Union[FeatureSet, str]): OHLC or CULR.

    Returns:
        np.ndarray: Shape (M, 4, n, n), equal to `encode_window` applied to each window.
    """
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[2] != 4:
        raise ShapeError(f"Expected (M, n, 4) OHLC windows, got {windows.shape}")
    if FeatureSet.parse(feature_set) is FeatureSet.OHLC:
        features = windows
    else:
        o, h, low, c = (windows[..., k] for k in range(4))
        top = np.maximum(o, c)
        bottom = np.minimum(o, c)
        features = np.stack([c, h - top, bottom - low, top - bottom], axis=-1)
    return encode_features(np.ascontiguousarray(np.swapaxes(features, 1, 2)))


def decode_tensor(tensor: GafTensor) -> np.ndarray:
    """Recover every channel's normalized series, shape (C, n)."""
    return gaf_decode_diagonal(tensor.channels)

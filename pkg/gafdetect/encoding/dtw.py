"""
Dynamic Time Warping distances between candlestick windows.

Unconstrained DTW with an absolute-difference local cost and the step set
{(-1, 0), (0, -1), (-1, -1)}. The batch form aligns one target against many
candidates with the same recurrence, evaluated candidate-wise in numpy.
"""

import logging

import numpy as np

from ..core.candles import OhlcSeries
from ..errors import InvalidInput, ShapeError
from .gaf import minmax_normalize

logger = logging.getLogger(__name__)


def _as_series(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise InvalidInput(f"DTW input {name} is empty")
    return x


def dtw_distance(a, b) -> float:
    """
    Cumulative cost of the optimal warping path between two series.

    Args:
        a (array-like): First series, non-empty.
        b (array-like): Second series, non-empty.

    Returns:
        float: D(m, n), non-negative and zero for identical inputs.

    Raises:
        InvalidInput: If either series is empty.
    """
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    m, n = len(a), len(b)
    cost = np.full((m + 1, n + 1), np.inf)
    cost[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            best = min(cost[i - 1, j], cost[i, j - 1], cost[i - 1, j - 1])
            cost[i, j] = abs(a[i - 1] - b[j - 1]) + best
    return float(cost[m, n])


def dtw_distance_batch(target, candidates) -> np.ndarray:
    """
    DTW distance from one target series to each row of `candidates`.

    Args:
        target (array-like): Shape (m,).
        candidates (array-like): Shape (M, n).

    Returns:
        np.ndarray: Shape (M,), equal to `dtw_distance(target, row)` for each row.
    """
    target = _as_series(target, "target")
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.ndim != 2 or candidates.shape[1] == 0:
        raise ShapeError(
            f"Candidates must be a non-empty (M, n) array, got {candidates.shape}"
        )
    # columns first so each DP cell is a contiguous vector over candidates
    columns = np.ascontiguousarray(candidates.T)
    n, count = columns.shape
    previous = np.full((n + 1, count), np.inf)
    previous[0] = 0.0
    for value in target:
        local = np.abs(columns - value)
        current = np.full((n + 1, count), np.inf)
        for j in range(n):
            best = np.minimum(np.minimum(previous[j + 1], current[j]), previous[j])
            current[j + 1] = local[j] + best
        previous = current
    return previous[n].copy()


def normalized_channels(window: OhlcSeries) -> np.ndarray:
    """The open, high, low and close series of a window, each min-max scaled; shape (4, n)."""
    return minmax_normalize(window.ohlc().T, axis=-1)


def multichannel_dtw(a: OhlcSeries, b: OhlcSeries) -> float:
    """
    Sum of the per-channel DTW distances over open, high, low and close.

    Each channel is min-max normalized within its own window first, so the distance
    compares shapes and ignores price level.

    Raises:
        InvalidInput: If either window is empty.
    """
    if len(a) == 0 or len(b) == 0:
        raise InvalidInput("multichannel_dtw needs non-empty windows")
    left = normalized_channels(a)
    right = normalized_channels(b)
    return float(sum(dtw_distance(x, y) for x, y in zip(left, right)))


def multichannel_dtw_batch(target: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """
    Multichannel DTW of one normalized target against many normalized candidates.

    Args:
        target (np.ndarray): Shape (C, m), already normalized per channel.
        candidates (np.ndarray): Shape (M, C, n), already normalized per channel.

    Returns:
        np.ndarray: Shape (M,), the channel-summed distances.
    """
    if candidates.ndim != 3 or candidates.shape[1] != target.shape[0]:
        raise ShapeError(
            f"Channel mismatch between target {target.shape} "
            f"and candidates {candidates.shape}"
        )
    total = np.zeros(candidates.shape[0])
    for channel in range(target.shape[0]):
        total += dtw_distance_batch(target[channel], candidates[:, channel, :])
    return total

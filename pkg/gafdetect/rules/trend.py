from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.patterns import TrendDirection
from ..errors import InvalidInput

# direction codes used by the vectorised scans
UP = 1
DOWN = -1
FLAT = 0


@dataclass(frozen=True)
class TrendAssessment:
    """
    The scale-free slope of a trend segment and the direction it qualifies as.

    Attributes:
        slope (float): Least-squares slope per bar divided by the mean close.
        direction (TrendDirection): UP, DOWN or NONE given the calibrated cutoffs.
    """

    slope: float
    direction: TrendDirection


def ols_slopes(segments: np.ndarray) -> np.ndarray:
    """
    Least-squares slope of each row against its bar index, divided by the row mean.

    Accumulates column by column, so a row yields bit-identical results whether it is
    passed alone or inside a larger batch.

    Args:
        segments (np.ndarray): Shape (M, L) with L >= 2.

    Returns:
        np.ndarray: Shape (M,).
    """
    segments = np.asarray(segments, dtype=np.float64)
    count, length = segments.shape
    if length < 2:
        raise InvalidInput(f"A trend needs at least 2 bars, got {length}")
    index = np.arange(length, dtype=np.float64)
    centred = index - index.mean()
    weights = centred / np.sum(centred * centred)
    slope = np.zeros(count)
    total = np.zeros(count)
    for k in range(length):
        slope += segments[:, k] * weights[k]
        total += segments[:, k]
    mean = total / length
    if np.any(mean == 0):
        raise InvalidInput("Mean close of a trend segment is zero")
    return slope / mean


def trend_slope(closes, lookback: int) -> float:
    """
    Scale-free trend slope of the last `lookback` closes.

    Args:
        closes (array-like): Close prices, oldest first.
        lookback (int): Number of trailing closes to fit, at least 2.

    Returns:
        float: The OLS slope per bar divided by the mean close of the fitted segment.

    Raises:
        InvalidInput: If `lookback` < 2 or the series is shorter than `lookback`.
    """
    closes = np.asarray(closes, dtype=np.float64).reshape(-1)
    if lookback < 2:
        raise InvalidInput(f"lookback must be at least 2, got {lookback}")
    if len(closes) < lookback:
        raise InvalidInput(f"Need {lookback} closes, got {len(closes)}")
    return float(ols_slopes(closes[None, len(closes) - lookback :])[0])


def window_trend_slopes(close: np.ndarray, window: int) -> np.ndarray:
    """
    Trend slopes of every sliding window of a close series.

    The trend segment of a window is every bar before its last three.

    Returns:
        np.ndarray: One slope per window; entry k belongs to the window ending at bar k + window - 1.
    """
    close = np.asarray(close, dtype=np.float64)
    if len(close) < window:
        return np.zeros(0)
    segments = sliding_window_view(close, window)[:, : window - 3]
    return ols_slopes(segments)


def direction_codes(
    slopes: np.ndarray, cutoff_up: float, cutoff_down: float
) -> np.ndarray:
    """Classify slopes as UP (1), DOWN (-1) or FLAT (0)."""
    slopes = np.asarray(slopes, dtype=np.float64)
    codes = np.zeros(slopes.shape, dtype=np.int8)
    codes[(slopes > 0) & (slopes >= cutoff_up)] = UP
    codes[(slopes < 0) & (-slopes >= cutoff_down)] = DOWN
    return codes


_CODE_TO_DIRECTION = {
    UP: TrendDirection.UP,
    DOWN: TrendDirection.DOWN,
    FLAT: TrendDirection.NONE,
}
_DIRECTION_TO_CODE = {v: k for k, v in _CODE_TO_DIRECTION.items()}


def direction_code(direction: Union[TrendDirection, str]) -> int:
    return _DIRECTION_TO_CODE[TrendDirection(direction)]


def assess_trend(slope: float, thresholds) -> TrendAssessment:
    """
    Qualify a slope against calibrated cutoffs.

    Args:
        slope (float): A scale-free trend slope.
        thresholds (RuleThresholds): Calibrated cutoffs.

    Returns:
        TrendAssessment: UP if the slope reaches the up cutoff, DOWN if its magnitude reaches
                         the down cutoff, NONE otherwise.
    """
    code = int(
        direction_codes(
            np.array([slope]), thresholds.trend_cutoff_up, thresholds.trend_cutoff_down
        )[0]
    )
    return TrendAssessment(slope=float(slope), direction=_CODE_TO_DIRECTION[code])

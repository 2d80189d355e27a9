from dataclasses import dataclass, replace
from typing import TextIO, Union
import logging
import math
import os

import numpy as np

from ..core.candles import OhlcSeries
from ..core.samples import WINDOW
from ..core.serialization import JsonSerializable
from ..errors import FormatError, InsufficientData, InvalidInput
from .trend import window_trend_slopes

logger = logging.getLogger(__name__)

MIN_CALIBRATION_WINDOWS = 100
TREND_PERCENTILE = 80.0
LONG_BODY_PERCENTILE = 75.0
SHORT_BODY_PERCENTILE = 25.0

_TEXT_KEYS = (
    "trend_cutoff_up",
    "trend_cutoff_down",
    "long_body_cutoff",
    "short_body_cutoff",
)


@dataclass(frozen=True)
class RuleThresholds(JsonSerializable):
    """
    Corpus-calibrated cutoffs shared by every pattern rule.

    Attributes:
        trend_cutoff_up (float): Smallest positive slope that counts as an uptrend.
        trend_cutoff_down (float): Smallest negative-slope magnitude that counts as a downtrend.
        long_body_cutoff (float): A real body strictly above this is long.
        short_body_cutoff (float): A real body strictly below this is short.
    """

    trend_cutoff_up: float
    trend_cutoff_down: float
    long_body_cutoff: float
    short_body_cutoff: float

    def __post_init__(self):
        values = [getattr(self, key) for key in _TEXT_KEYS]
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise InvalidInput(
                f"Rule thresholds must be finite and non-negative: {self}"
            )
        if self.long_body_cutoff < self.short_body_cutoff:
            raise InvalidInput("long_body_cutoff must not be below short_body_cutoff")

    def mirrored(self) -> "RuleThresholds":
        """The thresholds under price mirroring: up and down trend cutoffs trade places."""
        return replace(
            self,
            trend_cutoff_up=self.trend_cutoff_down,
            trend_cutoff_down=self.trend_cutoff_up,
        )

    def to_text(self, path_or_file: Union[str, os.PathLike, TextIO]) -> None:
        """Write the thresholds as `key=value` lines with round-trip float precision."""
        if isinstance(path_or_file, (str, os.PathLike)):
            with open(path_or_file, "w") as file:
                self.to_text(file)
            return
        for key in _TEXT_KEYS:
            path_or_file.write(f"{key}={getattr(self, key)!r}\n")

    @classmethod
    def from_text(
        cls, path_or_file: Union[str, os.PathLike, TextIO]
    ) -> "RuleThresholds":
        """
        Read thresholds written by `to_text`.

        Raises:
            FormatError: If a line is malformed or a key is missing or unknown.
        """
        if isinstance(path_or_file, (str, os.PathLike)):
            with open(path_or_file, "r") as file:
                return cls.from_text(file)
        values = {}
        for line in path_or_file:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in _TEXT_KEYS:
                raise FormatError(f"Unexpected thresholds line: {line!r}")
            try:
                values[key] = float(value)
            except ValueError as e:
                raise FormatError(f"Threshold {key} is not a number: {value!r}") from e
        missing = [k for k in _TEXT_KEYS if k not in values]
        if missing:
            raise FormatError(f"Thresholds file is missing: {', '.join(missing)}")
        return cls(**values)


def _side_cutoff(side: np.ndarray, fallback: np.ndarray) -> float:
    values = side if side.size else np.abs(fallback)
    return float(np.percentile(values, TREND_PERCENTILE))


def calibrate_thresholds(corpus: OhlcSeries, window: int = WINDOW) -> RuleThresholds:
    """
    Derive rule thresholds from a calibration corpus.

    Trend cutoffs are the 80th percentiles of the positive slopes and of the magnitudes of
    the negative slopes over every sliding window, so the steepest fifth of each side
    qualifies as a trend. Body cutoffs are the 75th and 25th percentiles of all real-body
    lengths. Percentiles interpolate linearly between closest ranks.

    Args:
        corpus (OhlcSeries): The calibration series.
        window (int): Sliding window length.

    Returns:
        RuleThresholds: The calibrated cutoffs.

    Raises:
        InsufficientData: If the corpus yields fewer than 100 windows.
    """
    slopes = window_trend_slopes(corpus.close, window)
    if len(slopes) < MIN_CALIBRATION_WINDOWS:
        raise InsufficientData(
            f"Calibration needs at least {MIN_CALIBRATION_WINDOWS} windows, "
            f"corpus of {len(corpus)} bars yields {len(slopes)}"
        )
    # a side without samples falls back to the magnitude of every slope
    cutoff_up = _side_cutoff(slopes[slopes > 0], slopes)
    cutoff_down = _side_cutoff(-slopes[slopes < 0], slopes)
    bodies = np.abs(corpus.close - corpus.open)
    thresholds = RuleThresholds(
        trend_cutoff_up=cutoff_up,
        trend_cutoff_down=cutoff_down,
        long_body_cutoff=float(np.percentile(bodies, LONG_BODY_PERCENTILE)),
        short_body_cutoff=float(np.percentile(bodies, SHORT_BODY_PERCENTILE)),
    )
    logger.info(
        "Calibrated rule thresholds over %d windows: %s", len(slopes), thresholds
    )
    return thresholds

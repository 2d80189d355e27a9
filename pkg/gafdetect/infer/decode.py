from dataclasses import dataclass
from typing import Optional

from ..core.candles import OhlcSeries
from ..core.patterns import PatternClass
from ..core.samples import MIN_WINDOW, WINDOW
from ..detector.model import DetectorOutput
from ..errors import InvalidInput

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Detection:
    """
    A pattern found in the trailing bars of a window.

    Detections are always anchored at the most recent bar: the pattern covers the last
    `window_size` candles ending at `end_timestamp`.

    Attributes:
        pattern_class (PatternClass): The detected pattern.
        window_size (int): Bars covered, 5 to 16.
        score (float): Confidence of the chosen pair times the top class probability.
        end_timestamp (Optional[int]): Timestamp of the last bar, epoch milliseconds.
    """

    pattern_class: PatternClass
    window_size: int
    score: float
    end_timestamp: Optional[int] = None

    def __post_init__(self):
        if not MIN_WINDOW <= self.window_size <= WINDOW:
            raise InvalidInput(
                f"Detection window_size out of range: {self.window_size}"
            )
        if not 0.0 <= self.score <= 1.0:
            raise InvalidInput(f"Detection score must lie in [0, 1], got {self.score}")

    @property
    def class_name(self) -> str:
        return self.pattern_class.display_name

    def pattern_window(self, window: OhlcSeries) -> OhlcSeries:
        """The candles of `window` covered by this detection."""
        return window[len(window) - self.window_size :]


def check_threshold(threshold: float) -> float:
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInput(f"Score threshold must lie in [0, 1], got {threshold}")
    return float(threshold)


def decode(
    output: DetectorOutput,
    threshold: float = DEFAULT_THRESHOLD,
    end_timestamp: Optional[int] = None,
) -> Optional[Detection]:
    """
    Turn one decoded head into a detection, or nothing when its score is too low.

    The pair with the higher confidence supplies the width; the class is the argmax of the
    class scores.

    Args:
        output (DetectorOutput): Activated head values of one sample.
        threshold (float): Minimum score in [0, 1].
        end_timestamp (Optional[int]): Timestamp of the window's last bar.

    Returns:
        Optional[Detection]: The detection, or None if its score is below `threshold`.

    Raises:
        InvalidInput: If `threshold` lies outside [0, 1].
    """
    threshold = check_threshold(threshold)
    confidence = output.pairs[output.best_pair][1]
    score = confidence * max(output.class_scores)
    if score < threshold:
        return None
    return Detection(
        pattern_class=output.pattern_class,
        window_size=output.window_size,
        score=min(max(score, 0.0), 1.0),
        end_timestamp=end_timestamp,
    )

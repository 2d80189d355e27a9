from dataclasses import dataclass

from ..errors import InvalidInput
from .candles import OhlcSeries
from .patterns import PatternClass

WINDOW = 16
MIN_WINDOW = 5


@dataclass(frozen=True)
class LabeledSample:
    """
    A 16-bar window whose last `window_size` candles form one pattern.

    Attributes:
        window (OhlcSeries): Exactly 16 candles, oldest first.
        pattern_class (PatternClass): The labelled pattern.
        window_size (int): Number of trailing candles the pattern occupies, 5 to 16.
    """

    window: OhlcSeries
    pattern_class: PatternClass
    window_size: int

    def __post_init__(self):
        n = len(self.window)
        if n != WINDOW:
            raise InvalidInput(
                f"A labelled window holds exactly {WINDOW} candles, got {n}"
            )
        size = int(self.window_size)
        if not MIN_WINDOW <= size <= WINDOW:
            raise InvalidInput(
                f"window_size must lie in [{MIN_WINDOW}, {WINDOW}], got {size}"
            )

    @property
    def end_timestamp(self) -> int:
        return int(self.window.timestamps[-1])

    @property
    def pattern_window(self) -> OhlcSeries:
        """The trailing candles covered by the pattern."""
        return self.window[WINDOW - self.window_size :]

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import InvalidInput, OrderError
from .patterns import CandleColor

OHLC_COLUMNS = ("open", "high", "low", "close")
CSV_COLUMNS = ("timestamp",) + OHLC_COLUMNS


@dataclass(frozen=True)
class Candle:
    """
    One trading period's open, high, low and close prices.

    Attributes:
        timestamp (int): Start of the period in epoch milliseconds.
        open (float): First traded price of the period.
        high (float): Highest price of the period.
        low (float): Lowest price of the period.
        close (float): Last traded price of the period.
    """

    timestamp: int
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        prices = (self.open, self.high, self.low, self.close)
        if not all(np.isfinite(p) and p > 0 for p in prices):
            raise InvalidInput(f"Candle prices must be finite and positive: {self}")
        if self.low > min(self.open, self.close) or self.high < max(
            self.open, self.close
        ):
            raise InvalidInput(f"Candle low/high do not bracket open/close: {self}")

    @property
    def color(self) -> CandleColor:
        return candle_color(self)

    def to_culr(self) -> "CulrBar":
        return to_culr(self)

    def mirrored(self, pivot: float) -> "Candle":
        """
        Reflect the candle's prices about `pivot / 2` (p -> pivot - p).

        Open and close swap direction, so a white candle becomes black; high and low trade places.

        Raises:
            InvalidInput: If a reflected price is not positive.
        """
        return Candle(
            timestamp=self.timestamp,
            open=pivot - self.open,
            high=pivot - self.low,
            low=pivot - self.high,
            close=pivot - self.close,
        )


@dataclass(frozen=True)
class CulrBar:
    """Close, upper shadow, lower shadow and real body of one candle."""

    close: float
    upper_shadow: float
    lower_shadow: float
    real_body: float


def candle_color(candle: Candle) -> CandleColor:
    """
    Classify a candle by the sign of its body.

    Args:
        candle (Candle): A valid candle.

    Returns:
        CandleColor: WHITE if close > open, BLACK if close < open, DOJI otherwise.
    """
    if candle.close > candle.open:
        return CandleColor.WHITE
    elif candle.close < candle.open:
        return CandleColor.BLACK
    return CandleColor.DOJI


def to_culr(candle: Candle) -> CulrBar:
    """
    Compute the close / upper shadow / lower shadow / real body features of a candle.

    Args:
        candle (Candle): A valid candle.

    Returns:
        CulrBar: Non-negative shadow and body lengths next to the close price.
    """
    top = max(candle.open, candle.close)
    bottom = min(candle.open, candle.close)
    return CulrBar(
        close=candle.close,
        upper_shadow=candle.high - top,
        lower_shadow=bottom - candle.low,
        real_body=top - bottom,
    )


def _readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True).reshape(-1)
    array.setflags(write=False)
    return array


class OhlcSeries:
    """
    A chronologically ordered run of candles, stored column-wise.

    The columns are read-only numpy arrays, so a series can be shared freely once built.
    Indexing with an integer returns a `Candle`, slicing returns another `OhlcSeries`.

    Args:
        timestamps: Epoch-millisecond timestamps, strictly increasing.
        open, high, low, close: Price columns of the same length.
        validate (bool): Check candle and ordering invariants. Slices of a validated
                         series skip the check.

    Raises:
        InvalidInput: If the columns differ in length or a candle is invalid.
        OrderError: If the timestamps are not strictly increasing.
    """

    __slots__ = ("_timestamps", "_open", "_high", "_low", "_close")

    def __init__(self, timestamps, open, high, low, close, validate: bool = True):
        self._timestamps = _readonly(timestamps, np.int64)
        self._open = _readonly(open, np.float64)
        self._high = _readonly(high, np.float64)
        self._low = _readonly(low, np.float64)
        self._close = _readonly(close, np.float64)
        if validate:
            self._validate()

    def _validate(self):
        n = len(self._timestamps)
        columns = (self._open, self._high, self._low, self._close)
        if any(len(col) != n for col in columns):
            raise InvalidInput("OHLC columns must all have the same length")
        prices = np.stack(columns)
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise InvalidInput("Candle prices must be finite and positive")
        if np.any(self._low > np.minimum(self._open, self._close)) or np.any(
            self._high < np.maximum(self._open, self._close)
        ):
            bad = int(
                np.argmax(
                    (self._low > np.minimum(self._open, self._close))
                    | (self._high < np.maximum(self._open, self._close))
                )
            )
            raise InvalidInput(f"Candle {bad} has low/high not bracketing open/close")
        if n > 1 and np.any(np.diff(self._timestamps) <= 0):
            bad = int(np.argmax(np.diff(self._timestamps) <= 0)) + 1
            raise OrderError(f"Timestamps must be strictly increasing (row {bad})")

    @classmethod
    def from_candles(cls, candles: Iterable[Candle]) -> "OhlcSeries":
        candles = list(candles)
        return cls(
            [c.timestamp for c in candles],
            [c.open for c in candles],
            [c.high for c in candles],
            [c.low for c in candles],
            [c.close for c in candles],
        )

    @classmethod
    def from_array(
        cls, timestamps, ohlc: np.ndarray, validate: bool = True
    ) -> "OhlcSeries":
        """Build a series from an (n, 4) array with columns open, high, low, close."""
        ohlc = np.asarray(ohlc, dtype=np.float64)
        if ohlc.ndim != 2 or ohlc.shape[1] != 4:
            raise InvalidInput(f"Expected an (n, 4) OHLC array, got shape {ohlc.shape}")
        return cls(timestamps, ohlc[:, 0], ohlc[:, 1], ohlc[:, 2], ohlc[:, 3], validate)

    @classmethod
    def from_dataframe(cls, df: pd.DataFrame) -> "OhlcSeries":
        """
        Build a series from a DataFrame with `timestamp`, `open`, `high`, `low`, `close` columns.

        Raises:
            InvalidInput: If a column is missing.
        """
        missing = [c for c in CSV_COLUMNS if c not in df.columns]
        if missing:
            raise InvalidInput(f"Missing columns: {', '.join(missing)}")
        return cls(
            df["timestamp"].to_numpy(dtype=np.int64),
            df["open"].to_numpy(dtype=np.float64),
            df["high"].to_numpy(dtype=np.float64),
            df["low"].to_numpy(dtype=np.float64),
            df["close"].to_numpy(dtype=np.float64),
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "timestamp": self._timestamps,
                "open": self._open,
                "high": self._high,
                "low": self._low,
                "close": self._close,
            }
        )

    @property
    def timestamps(self) -> np.ndarray:
        return self._timestamps

    @property
    def open(self) -> np.ndarray:
        return self._open

    @property
    def high(self) -> np.ndarray:
        return self._high

    @property
    def low(self) -> np.ndarray:
        return self._low

    @property
    def close(self) -> np.ndarray:
        return self._close

    @property
    def candles(self) -> Tuple[Candle, ...]:
        return tuple(self)

    def ohlc(self) -> np.ndarray:
        """The (n, 4) array of open, high, low, close."""
        return np.stack([self._open, self._high, self._low, self._close], axis=1)

    def culr(self) -> np.ndarray:
        """The (n, 4) array of close, upper shadow, lower shadow, real body."""
        top = np.maximum(self._open, self._close)
        bottom = np.minimum(self._open, self._close)
        return np.stack(
            [self._close, self._high - top, bottom - self._low, top - bottom], axis=1
        )

    def mirrored(self, pivot: Optional[float] = None) -> "OhlcSeries":
        """
        Reflect every price about `pivot / 2` (p -> pivot - p), swapping highs and lows.

        Args:
            pivot (Optional[float]): Reflection constant. Defaults to `high.max() + low.min()`,
                                     which maps the series' price range onto itself.

        Raises:
            InvalidInput: If a reflected price is not positive.
        """
        if pivot is None:
            pivot = float(self._high.max() + self._low.min())
        return OhlcSeries(
            self._timestamps,
            pivot - self._open,
            pivot - self._low,
            pivot - self._high,
            pivot - self._close,
        )

    def __len__(self) -> int:
        return len(self._timestamps)

    def __iter__(self) -> Iterator[Candle]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, key: Union[int, slice]):
        if isinstance(key, slice):
            if key.step not in (None, 1):
                raise InvalidInput("OhlcSeries slices must be contiguous")
            return OhlcSeries(
                self._timestamps[key],
                self._open[key],
                self._high[key],
                self._low[key],
                self._close[key],
                validate=False,
            )
        i = int(key)
        return Candle(
            timestamp=int(self._timestamps[i]),
            open=float(self._open[i]),
            high=float(self._high[i]),
            low=float(self._low[i]),
            close=float(self._close[i]),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, OhlcSeries):
            return NotImplemented
        return (
            np.array_equal(self._timestamps, other._timestamps)
            and np.array_equal(self._open, other._open)
            and np.array_equal(self._high, other._high)
            and np.array_equal(self._low, other._low)
            and np.array_equal(self._close, other._close)
        )

    __hash__ = None

    def __repr__(self) -> str:
        if len(self) == 0:
            return "OhlcSeries(empty)"
        start, end = self._timestamps[0], self._timestamps[-1]
        return f"OhlcSeries(n={len(self)}, start={start}, end={end})"

from typing import Iterator, Literal, Optional, TextIO, Tuple, Union
import logging
import os
import warnings

import numpy as np
import pandas as pd

from ..errors import DatasetQualityWarning, InvalidInput
from .candles import CSV_COLUMNS, Candle, OhlcSeries
from .utils import format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

TimestampFormat = Literal["iso", "epoch_ms"]
PRICE_COLUMNS = ["open", "high", "low", "close"]


def _detect_format(column: pd.Series) -> TimestampFormat:
    if pd.api.types.is_integer_dtype(column):
        return "epoch_ms"
    if pd.api.types.is_float_dtype(column):
        raise InvalidInput("Epoch timestamps must be integer milliseconds")
    return "iso"


def _timestamps_to_ms(column: pd.Series, fmt: TimestampFormat) -> np.ndarray:
    if fmt == "epoch_ms":
        if not pd.api.types.is_integer_dtype(column):
            raise InvalidInput("Timestamp column mixes epoch-ms and ISO-8601 values")
        return column.to_numpy(dtype=np.int64)
    return np.array([parse_timestamp(str(v)) for v in column], dtype=np.int64)


def _check_header(df: pd.DataFrame):
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise InvalidInput(f"CSV is missing columns: {', '.join(missing)}")


def _read_frame(path_or_file, **kwargs):
    try:
        return pd.read_csv(path_or_file, float_precision="round_trip", **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidInput(f"Unreadable CSV: {e}") from e


def _iter_chunks(reader) -> Iterator[pd.DataFrame]:
    try:
        yield from reader
    except pd.errors.ParserError as e:
        raise InvalidInput(f"Unreadable CSV: {e}") from e


def _valid_prices(df: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
    """
    Numeric prices of every row and a mask of the rows that form valid candles.

    Rows with a missing, non-numeric, non-finite or non-positive price, or whose low and
    high do not bracket open and close, are masked out and reported with a
    `DatasetQualityWarning`.
    """
    prices = (
        df[PRICE_COLUMNS].apply(pd.to_numeric, errors="coerce").to_numpy(np.float64)
    )
    o, h, low, c = prices.T
    keep = (
        np.isfinite(prices).all(axis=1)
        & (prices > 0).all(axis=1)
        & (low <= np.minimum(o, c))
        & (h >= np.maximum(o, c))
    )
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        first = int(np.argmax(~keep))
        warnings.warn(
            f"Dropped {dropped} CSV rows with invalid prices, first at row {first}",
            DatasetQualityWarning,
            stacklevel=3,
        )
    return prices, keep


def read_csv(path_or_file: Union[str, os.PathLike, TextIO]) -> OhlcSeries:
    """
    Read a `timestamp,open,high,low,close` CSV file into an `OhlcSeries`.

    The timestamp column holds either ISO-8601 UTC strings or integer epoch milliseconds;
    the form is detected once per file. Rows whose prices do not form a valid candle are
    dropped with a `DatasetQualityWarning`.

    Args:
        path_or_file (Union[str, os.PathLike, TextIO]): The CSV file path or a text stream.

    Returns:
        OhlcSeries: The validated series.

    Raises:
        InvalidInput: If the file cannot be parsed, a column is missing or a timestamp cannot be parsed.
        OrderError: If timestamps are not strictly increasing.
    """
    df = _read_frame(path_or_file)
    _check_header(df)
    fmt = _detect_format(df["timestamp"]) if len(df) else "epoch_ms"
    if len(df):
        timestamps = _timestamps_to_ms(df["timestamp"], fmt)
    else:
        timestamps = np.zeros(0, dtype=np.int64)
    prices, keep = _valid_prices(df)
    series = OhlcSeries(timestamps[keep], *prices[keep].T)
    logger.info("Read %d candles (%s timestamps)", len(series), fmt)
    return series


def iter_candles(
    path_or_file: Union[str, os.PathLike, TextIO], chunksize: int = 10_000
) -> Iterator[Candle]:
    """
    Stream candles from a CSV file without loading it whole.

    Rows that do not form a valid candle are skipped with a `DatasetQualityWarning`;
    ordering is left to the consumer.

    Args:
        path_or_file (Union[str, os.PathLike, TextIO]): The CSV file path or a text stream.
        chunksize (int): Rows parsed per pandas chunk.

    Yields:
        Candle: One candle per valid row, in file order.

    Raises:
        InvalidInput: If the file cannot be parsed or a timestamp is malformed.
    """
    fmt: Optional[TimestampFormat] = None
    for chunk in _iter_chunks(_read_frame(path_or_file, chunksize=chunksize)):
        _check_header(chunk)
        if fmt is None:
            fmt = _detect_format(chunk["timestamp"])
        timestamps = _timestamps_to_ms(chunk["timestamp"], fmt)
        prices, keep = _valid_prices(chunk)
        for ts, (o, h, low, c) in zip(timestamps[keep], prices[keep]):
            yield Candle(
                timestamp=int(ts),
                open=float(o),
                high=float(h),
                low=float(low),
                close=float(c),
            )


def to_csv(
    series: OhlcSeries,
    path_or_file: Union[str, os.PathLike, TextIO],
    timestamp_format: TimestampFormat = "iso",
) -> None:
    """
    Write a series as a `timestamp,open,high,low,close` CSV file.

    Prices are written with full round-trip precision, so reading the file back yields
    an identical series.

    Args:
        series (OhlcSeries): The candles to write.
        path_or_file (Union[str, os.PathLike, TextIO]): Destination path or text stream.
        timestamp_format (Literal["iso", "epoch_ms"]): How to write timestamps.
    """
    if timestamp_format not in ("iso", "epoch_ms"):
        raise InvalidInput(f"Unknown timestamp format: {timestamp_format!r}")
    df = series.to_dataframe()
    if timestamp_format == "iso":
        df["timestamp"] = [format_timestamp(ts) for ts in series.timestamps]
    df.to_csv(path_or_file, index=False, columns=list(CSV_COLUMNS), lineterminator="\n")

from collections import deque
from typing import Deque, Iterable, List, Optional, TextIO, Union
import logging
import os

import numpy as np
import pandas as pd

from ..core.candles import Candle, OhlcSeries
from ..core.patterns import FeatureSet
from ..core.samples import WINDOW
from ..detector.model import DetectorModel, DetectorOutput, activate
from ..encoding.gaf import encode_window
from ..errors import InvalidInput, OrderError, StateError
from .decode import DEFAULT_THRESHOLD, Detection, check_threshold, decode

logger = logging.getLogger(__name__)

DETECTION_COLUMNS = ("end_timestamp", "class_name", "window_size", "score")


class WindowBuffer:
    """
    The latest 16 candles of one stream, oldest first.

    A buffer belongs to a single stream and is not meant to be shared between threads.
    """

    def __init__(self, capacity: int = WINDOW):
        self._candles: Deque[Candle] = deque(maxlen=capacity)

    @property
    def capacity(self) -> int:
        return self._candles.maxlen

    @property
    def is_full(self) -> bool:
        return len(self._candles) == self.capacity

    @property
    def last_timestamp(self) -> Optional[int]:
        return self._candles[-1].timestamp if self._candles else None

    def __len__(self) -> int:
        return len(self._candles)

    def push(self, candle: Candle) -> None:
        """
        Append a candle, dropping the oldest once the buffer is full.

        Raises:
            OrderError: If the candle is not newer than the latest buffered one.
        """
        if self._candles and candle.timestamp <= self._candles[-1].timestamp:
            raise OrderError(
                f"Candle at {candle.timestamp} "
                f"is not after {self._candles[-1].timestamp}"
            )
        self._candles.append(candle)

    def window(self) -> OhlcSeries:
        """
        The buffered candles as a series.

        Raises:
            StateError: If the buffer is not full yet.
        """
        if not self.is_full:
            raise StateError(f"Buffer holds {len(self)} of {self.capacity} candles")
        return OhlcSeries.from_candles(self._candles)

    def clear(self) -> None:
        self._candles.clear()


def _resolve_feature_set(model: DetectorModel, feature_set) -> FeatureSet:
    trained_on = model.architecture.feature_set
    if feature_set is None:
        return trained_on
    feature_set = FeatureSet.parse(feature_set)
    if feature_set is not trained_on:
        raise InvalidInput(
            f"Model was trained on {trained_on.name} windows, not {feature_set.name}"
        )
    return feature_set


def infer_window(
    window: OhlcSeries, model: DetectorModel, feature_set=None
) -> DetectorOutput:
    """Encode one 16-bar window and run the model on it in inference mode."""
    tensor = encode_window(window, _resolve_feature_set(model, feature_set))
    raw = model.forward(tensor.channels[np.newaxis], training=False)
    return DetectorOutput.from_activated(activate(raw)[0])


def step(
    buffer: WindowBuffer,
    candle: Candle,
    model: DetectorModel,
    feature_set=None,
    threshold: float = DEFAULT_THRESHOLD,
) -> Optional[Detection]:
    """
    Push a new candle and, once 16 bars are buffered, detect on the latest window.

    Args:
        buffer (WindowBuffer): The stream's buffer.
        candle (Candle): The newest bar.
        model (DetectorModel): A trained detector.
        feature_set: OHLC or CULR; defaults to the model's own.
        threshold (float): Minimum detection score.

    Returns:
        Optional[Detection]: A detection ending at `candle`, or None.

    Raises:
        OrderError: If `candle` is not newer than the buffered candles.
    """
    threshold = check_threshold(threshold)
    buffer.push(candle)
    if not buffer.is_full:
        return None
    output = infer_window(buffer.window(), model, feature_set)
    return decode(output, threshold, end_timestamp=candle.timestamp)


class StreamDetector:
    """
    Moving-window detection over one live stream.

    Args:
        model (DetectorModel): A trained detector, used read-only.
        threshold (float): Minimum detection score.
        feature_set: OHLC or CULR; defaults to the model's own.
    """

    def __init__(
        self,
        model: DetectorModel,
        threshold: float = DEFAULT_THRESHOLD,
        feature_set=None,
    ):
        self.model = model
        self.threshold = check_threshold(threshold)
        self.feature_set = _resolve_feature_set(model, feature_set)
        self.buffer = WindowBuffer()
        self.bars_seen = 0

    def push(self, candle: Candle) -> Optional[Detection]:
        detection = step(
            self.buffer, candle, self.model, self.feature_set, self.threshold
        )
        self.bars_seen += 1
        if detection is not None:
            logger.debug("Detected %s", detection)
        return detection

    def reset(self) -> None:
        self.buffer.clear()
        self.bars_seen = 0


def detect_stream(
    candles: Iterable[Candle],
    model: DetectorModel,
    threshold: float = DEFAULT_THRESHOLD,
    feature_set=None,
) -> List[Detection]:
    """
    Replay a stream of candles through a fresh buffer.

    Returns:
        List[Detection]: Detections in stream order.
    """
    detector = StreamDetector(model, threshold, feature_set)
    detections = [d for d in map(detector.push, candles) if d is not None]
    logger.info("Found %d detections in %d bars", len(detections), detector.bars_seen)
    return detections


def detections_to_dataframe(detections: Iterable[Detection]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (d.end_timestamp, d.class_name, d.window_size, d.score)
            for d in detections
        ],
        columns=list(DETECTION_COLUMNS),
    )


def write_detections_csv(
    detections: Iterable[Detection], path_or_file: Union[str, os.PathLike, TextIO]
) -> None:
    """Write `end_timestamp,class_name,window_size,score` rows, timestamps in epoch ms."""
    detections_to_dataframe(detections).to_csv(
        path_or_file, index=False, lineterminator="\n"
    )

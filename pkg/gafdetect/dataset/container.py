"""
On-disk dataset container.

A dataset directory holds `manifest.json`, `samples.bin` and `window_timestamps.bin`.
The sample file starts with the magic bytes ``GAFD``, a little-endian u32 format version
and a u32 record count, followed by packed records:

    class u8 | window_size u8 | split u8 | end timestamp i64 |
    16 x 4 float64 candles (open, high, low, close) | C x N x N float32 tensor

The timestamp file is a bare little-endian i64 array of shape (count, 16) holding every
window's bar timestamps, so windows that straddle a gap survive a round trip.
Directories without it fall back to rebuilding timestamps from the bar interval.
"""

from typing import List, Optional, Tuple, Union
import json
import logging
import os

import numpy as np

from ..core.candles import OhlcSeries
from ..core.patterns import PatternClass
from ..core.samples import WINDOW, LabeledSample
from ..encoding.gaf import GafTensor
from ..errors import FormatError, InvalidInput
from .pipeline import FORMAT_VERSION, DatasetManifest, SampleRecord, Split

logger = logging.getLogger(__name__)

MAGIC = b"GAFD"
MANIFEST_NAME = "manifest.json"
SAMPLES_NAME = "samples.bin"
TIMESTAMPS_NAME = "window_timestamps.bin"
CHANNELS = 4

HEADER_DTYPE = np.dtype([("magic", "S4"), ("version", "<u4"), ("count", "<u4")])
RECORD_DTYPE = np.dtype(
    [
        ("pattern_class", "u1"),
        ("window_size", "u1"),
        ("split", "u1"),
        ("timestamp", "<i8"),
        ("candles", "<f8", (WINDOW, 4)),
        ("tensor", "<f4", (CHANNELS, WINDOW, WINDOW)),
    ]
)


def encode_records(records: List[SampleRecord]) -> bytes:
    """Pack records into the binary sample-file layout, header included."""
    header = np.array([(MAGIC, FORMAT_VERSION, len(records))], dtype=HEADER_DTYPE)
    body = np.zeros(len(records), dtype=RECORD_DTYPE)
    for i, record in enumerate(records):
        if record.tensor.channels.shape != (CHANNELS, WINDOW, WINDOW):
            raise InvalidInput(
                f"Record {i} tensor has shape {record.tensor.channels.shape}"
            )
        body["pattern_class"][i] = record.sample.pattern_class.id
        body["window_size"][i] = record.sample.window_size
        body["split"][i] = record.split.value
        body["timestamp"][i] = record.end_timestamp
        body["candles"][i] = record.sample.window.ohlc()
        body["tensor"][i] = record.tensor.channels
    return header.tobytes() + body.tobytes()


def encode_window_timestamps(records: List[SampleRecord]) -> bytes:
    """Pack the window timestamps of every record as a (count, 16) i64 array."""
    stamps = np.zeros((len(records), WINDOW), dtype="<i8")
    for i, record in enumerate(records):
        stamps[i] = record.sample.window.timestamps
    return stamps.tobytes()


def decode_records(
    payload: bytes,
    manifest: DatasetManifest,
    window_timestamps: Optional[bytes] = None,
) -> List[SampleRecord]:
    """
    Unpack a sample file.

    Args:
        payload (bytes): The sample file contents.
        manifest (DatasetManifest): The manifest written alongside it.
        window_timestamps (Optional[bytes]): The timestamp file contents. Without it,
            window timestamps are rebuilt backwards from each end timestamp with the
            manifest's bar interval.

    Raises:
        FormatError: If the magic bytes, version, count or length do not check out, or
            the timestamp file disagrees with the records.
    """
    if len(payload) < HEADER_DTYPE.itemsize:
        raise FormatError("Sample file is shorter than its header")
    header = np.frombuffer(payload, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise FormatError(f"Bad magic bytes {bytes(header['magic'])!r}")
    if int(header["version"]) != FORMAT_VERSION:
        raise FormatError(f"Unsupported sample file version {int(header['version'])}")
    count = int(header["count"])
    expected = HEADER_DTYPE.itemsize + count * RECORD_DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"Sample file holds {len(payload)} bytes, {count} records need {expected}"
        )
    if count != manifest.record_count:
        raise FormatError(
            f"Sample file holds {count} records, manifest lists {manifest.record_count}"
        )
    body = np.frombuffer(payload, dtype=RECORD_DTYPE, offset=HEADER_DTYPE.itemsize)
    stamps = _window_stamps(body, manifest, window_timestamps)
    records = []
    for row, timestamps in zip(body, stamps):
        try:
            window = OhlcSeries.from_array(timestamps, row["candles"])
            sample = LabeledSample(
                window,
                PatternClass.from_id(int(row["pattern_class"])),
                int(row["window_size"]),
            )
            split = Split(int(row["split"]))
        except (InvalidInput, ValueError) as e:
            raise FormatError(f"Corrupt sample record: {e}") from e
        tensor = GafTensor(row["tensor"].astype(np.float64), manifest.feature_set)
        records.append(SampleRecord(sample, tensor, split))
    return records


def _window_stamps(
    body: np.ndarray, manifest: DatasetManifest, payload: Optional[bytes]
) -> np.ndarray:
    ends = body["timestamp"].astype(np.int64)
    if payload is None:
        offsets = manifest.bar_interval_ms * np.arange(-(WINDOW - 1), 1, dtype=np.int64)
        return ends[:, None] + offsets
    expected = len(body) * WINDOW * 8
    if len(payload) != expected:
        raise FormatError(
            f"Timestamp file holds {len(payload)} bytes, "
            f"{len(body)} windows need {expected}"
        )
    if not len(body):
        return np.zeros((0, WINDOW), dtype=np.int64)
    stamps = np.frombuffer(payload, dtype="<i8").reshape(len(body), WINDOW)
    if not np.array_equal(stamps[:, -1], ends):
        raise FormatError("Timestamp file does not end where the sample records end")
    return stamps.astype(np.int64)


def save_dataset(
    directory: Union[str, os.PathLike],
    manifest: DatasetManifest,
    records: List[SampleRecord],
) -> None:
    """
    Write a dataset directory.

    Args:
        directory (Union[str, os.PathLike]): Created if missing.
        manifest (DatasetManifest): Metadata describing `records`.
        records (List[SampleRecord]): The samples, in time order.
    """
    if manifest.record_count != len(records):
        raise InvalidInput(
            f"Manifest lists {manifest.record_count} records, {len(records)} given"
        )
    os.makedirs(directory, exist_ok=True)
    manifest.to_json(os.path.join(directory, MANIFEST_NAME))
    with open(os.path.join(directory, SAMPLES_NAME), "wb") as file:
        file.write(encode_records(records))
    with open(os.path.join(directory, TIMESTAMPS_NAME), "wb") as file:
        file.write(encode_window_timestamps(records))
    logger.info("Saved %d samples to %s", len(records), directory)


def load_dataset(
    directory: Union[str, os.PathLike]
) -> Tuple[DatasetManifest, List[SampleRecord]]:
    """
    Read a dataset directory written by `save_dataset`.

    Raises:
        FormatError: If the manifest or the sample file cannot be decoded.
    """
    try:
        manifest = DatasetManifest.from_json(os.path.join(directory, MANIFEST_NAME))
    except (json.JSONDecodeError, TypeError, KeyError, InvalidInput) as e:
        raise FormatError(f"Unreadable manifest in {directory}: {e}") from e
    with open(os.path.join(directory, SAMPLES_NAME), "rb") as file:
        payload = file.read()
    stamps_path = os.path.join(directory, TIMESTAMPS_NAME)
    window_timestamps = None
    if os.path.exists(stamps_path):
        with open(stamps_path, "rb") as file:
            window_timestamps = file.read()
    records = decode_records(payload, manifest, window_timestamps)
    logger.info("Loaded %d samples from %s", len(records), directory)
    return manifest, records

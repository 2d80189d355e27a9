from dataclasses import replace

import numpy as np
import pytest

from gafdetect.core.candles import OhlcSeries
from gafdetect.core.samples import LabeledSample
from gafdetect.dataset import load_dataset, save_dataset
from gafdetect.dataset.container import (
    HEADER_DTYPE,
    MANIFEST_NAME,
    RECORD_DTYPE,
    SAMPLES_NAME,
    TIMESTAMPS_NAME,
    decode_records,
    encode_records,
    encode_window_timestamps,
)
from gafdetect.dataset.pipeline import SampleRecord
from gafdetect.errors import FormatError, InvalidInput


@pytest.fixture(scope="module")
def saved(tmp_path_factory, small_dataset):
    manifest, records = small_dataset
    directory = tmp_path_factory.mktemp("dataset")
    save_dataset(directory, manifest, records)
    return directory


def test__load_dataset__must_read_back_manifest_and_records(saved, small_dataset):
    manifest, records = small_dataset
    loaded_manifest, loaded = load_dataset(saved)
    assert loaded_manifest == manifest
    assert len(loaded) == len(records)
    for original, restored in zip(records, loaded):
        assert restored.split is original.split
        assert restored.sample.pattern_class is original.sample.pattern_class
        assert restored.sample.window_size == original.sample.window_size
        assert restored.sample.window == original.sample.window
        assert restored.tensor.feature_set is manifest.feature_set
        np.testing.assert_allclose(
            restored.tensor.channels, original.tensor.channels, rtol=0, atol=1e-6
        )


def test__save_dataset__must_write_header_and_packed_records(saved, small_dataset):
    _, records = small_dataset
    payload = (saved / SAMPLES_NAME).read_bytes()
    assert payload[:4] == b"GAFD"
    assert len(payload) == HEADER_DTYPE.itemsize + len(records) * RECORD_DTYPE.itemsize
    assert (saved / MANIFEST_NAME).exists()


def test__save_dataset__must_produce_identical_bytes__when_saved_twice(
    tmp_path, saved, small_dataset
):
    manifest, records = small_dataset
    save_dataset(tmp_path, manifest, records)
    for name in (MANIFEST_NAME, SAMPLES_NAME, TIMESTAMPS_NAME):
        assert (tmp_path / name).read_bytes() == (saved / name).read_bytes()


def test__save_dataset__must_raise_invalid_input__when_manifest_count_differs(
    tmp_path, small_dataset
):
    manifest, records = small_dataset
    with pytest.raises(InvalidInput):
        save_dataset(tmp_path, manifest, records[:-1])


def test__decode_records__must_raise_format_error__when_magic_is_wrong(small_dataset):
    manifest, records = small_dataset
    payload = b"XXXX" + encode_records(records)[4:]
    with pytest.raises(FormatError, match="magic"):
        decode_records(payload, manifest)


def test__decode_records__must_raise_format_error__when_payload_is_truncated(
    small_dataset
):
    manifest, records = small_dataset
    payload = encode_records(records)
    with pytest.raises(FormatError):
        decode_records(payload[:-10], manifest)
    with pytest.raises(FormatError):
        decode_records(payload[:5], manifest)


def test__decode_records__must_raise_format_error__when_version_is_unknown(
    small_dataset
):
    manifest, records = small_dataset
    payload = bytearray(encode_records(records))
    payload[4] = 99
    with pytest.raises(FormatError, match="version"):
        decode_records(bytes(payload), manifest)


def test__decode_records__must_raise_format_error__when_class_id_is_corrupt(
    small_dataset
):
    manifest, records = small_dataset
    payload = bytearray(encode_records(records))
    payload[HEADER_DTYPE.itemsize] = 0
    with pytest.raises(FormatError, match="Corrupt"):
        decode_records(bytes(payload), manifest)


def test__load_dataset__must_raise_format_error__when_manifest_is_not_json(
    saved, tmp_path
):
    (tmp_path / MANIFEST_NAME).write_text("{not json")
    (tmp_path / SAMPLES_NAME).write_bytes((saved / SAMPLES_NAME).read_bytes())
    with pytest.raises(FormatError):
        load_dataset(tmp_path)


@pytest.fixture
def gapped(small_dataset):
    manifest, records = small_dataset
    record = records[0]
    window = record.sample.window
    timestamps = np.array(window.timestamps)
    timestamps[:8] -= 3_600_000
    shifted = OhlcSeries.from_array(timestamps, window.ohlc())
    sample = LabeledSample(
        shifted, record.sample.pattern_class, record.sample.window_size
    )
    return replace(manifest, record_count=1), [
        SampleRecord(sample, record.tensor, record.split)
    ]


def test__load_dataset__must_keep_window_timestamps__when_a_window_spans_a_gap(
    gapped, tmp_path
):
    manifest, records = gapped
    save_dataset(tmp_path, manifest, records)
    _, loaded = load_dataset(tmp_path)
    assert loaded[0].sample.window == records[0].sample.window
    assert loaded[0].end_timestamp == records[0].end_timestamp


def test__load_dataset__must_rebuild_timestamps__when_the_timestamp_file_is_absent(
    saved, small_dataset, tmp_path
):
    _, records = small_dataset
    for name in (MANIFEST_NAME, SAMPLES_NAME):
        (tmp_path / name).write_bytes((saved / name).read_bytes())
    _, loaded = load_dataset(tmp_path)
    for original, restored in zip(records, loaded):
        assert restored.sample.window == original.sample.window


def test__decode_records__must_raise_format_error__when_the_timestamp_file_disagrees(
    gapped, small_dataset
):
    manifest, records = gapped
    payload = encode_records(records)
    stamps = encode_window_timestamps(records)
    with pytest.raises(FormatError, match="bytes"):
        decode_records(payload, manifest, stamps[:-8])
    other = encode_window_timestamps(small_dataset[1][1:2])
    with pytest.raises(FormatError, match="end"):
        decode_records(payload, manifest, other)

import io

import numpy as np
import pytest

from gafdetect.errors import FormatError, InvalidInput
from gafdetect.nn import load_checkpoint, save_checkpoint


def checkpoint_bytes(tensors, metadata):
    buffer = io.BytesIO()
    save_checkpoint(buffer, tensors, metadata)
    return buffer.getvalue()


def test__load_checkpoint__must_read_back_float32_tensors_and_metadata(tmp_path):
    rng = np.random.default_rng(0)
    tensors = {
        "conv.weight": rng.normal(size=(4, 2, 3, 3)),
        "head.bias": rng.normal(size=12),
        "scale": np.array(2.5),
    }
    metadata = {"epoch": 7, "architecture": {"filters": [32, 64]}}
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, tensors, metadata)
    loaded, loaded_metadata = load_checkpoint(path)
    assert loaded_metadata == metadata
    assert set(loaded) == set(tensors)
    for name, value in tensors.items():
        assert loaded[name].dtype == np.float32
        assert loaded[name].shape == value.shape
        np.testing.assert_array_equal(loaded[name], value.astype(np.float32))


def test__save_checkpoint__must_write_a_readable_header():
    payload = checkpoint_bytes({"b": np.zeros(2), "a": np.ones((1, 3))}, {"k": 1})
    header = payload.split(b"end\n")[0].decode("ascii").splitlines()
    assert header == [
        "GAFCKPT 1",
        'meta {"k": 1}',
        "tensor a float32 1x3 0 12",
        "tensor b float32 2 12 8",
    ]


def test__save_checkpoint__must_be_byte_identical_for_identical_input():
    tensors = {"w": np.arange(6.0).reshape(2, 3)}
    assert checkpoint_bytes(tensors, {"x": 1, "a": 2}) == checkpoint_bytes(
        tensors, {"a": 2, "x": 1}
    )


@pytest.mark.parametrize("name", ["", "two words", "tab\tname"])
def test__save_checkpoint__must_raise_invalid_input__when_name_has_whitespace(name):
    with pytest.raises(InvalidInput):
        checkpoint_bytes({name: np.zeros(1)}, {})


@pytest.mark.parametrize(
    "payload",
    [
        b"NOTCKPT 1\nend\n",
        b"GAFCKPT 2\nend\n",
        b"GAFCKPT 1\nmeta {}\n",
        b"GAFCKPT 1\nmeta {broken\nend\n",
        b"GAFCKPT 1\ntensor w float64 2 0 16\nend\n",
        b"GAFCKPT 1\ntensor w float32 2x? 0 8\nend\n",
        b"GAFCKPT 1\nweights 3\nend\n",
    ],
)
def test__load_checkpoint__must_raise_format_error__when_header_is_malformed(payload):
    with pytest.raises(FormatError):
        load_checkpoint(io.BytesIO(payload))


def test__load_checkpoint__must_raise_format_error__when_payload_is_truncated():
    payload = checkpoint_bytes({"w": np.zeros((3, 3))}, {})
    with pytest.raises(FormatError, match="truncated"):
        load_checkpoint(io.BytesIO(payload[:-4]))

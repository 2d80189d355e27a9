"""
Checkpoint container.

A text header followed by concatenated little-endian float32 payloads:

    GAFCKPT 1
    meta <one-line JSON object>
    tensor <name> float32 <d0>x<d1>x... <offset> <nbytes>
    ...
    end

Offsets are relative to the first payload byte. Scalars use the shape `-`.
"""

from typing import BinaryIO, Dict, Tuple, Union
import json
import logging
import os

import numpy as np

from ..core.utils import convert_non_json_serializable_types
from ..errors import FormatError, InvalidInput

logger = logging.getLogger(__name__)

MAGIC_LINE = "GAFCKPT"
VERSION = 1
DTYPE = np.dtype("<f4")


def _format_shape(shape) -> str:
    return "x".join(str(d) for d in shape) if shape else "-"


def _parse_shape(text: str) -> Tuple[int, ...]:
    return () if text == "-" else tuple(int(d) for d in text.split("x"))


def save_checkpoint(
    path_or_file: Union[str, os.PathLike, BinaryIO],
    tensors: Dict[str, np.ndarray],
    metadata: Dict,
) -> None:
    """
    Write named tensors as float32 together with JSON metadata.

    Args:
        path_or_file (Union[str, os.PathLike, BinaryIO]): Destination path or binary stream.
        tensors (Dict[str, np.ndarray]): Tensors keyed by names without whitespace.
        metadata (Dict): JSON-serialisable header data.
    """
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "wb") as file:
            save_checkpoint(file, tensors, metadata)
        return
    lines = [f"{MAGIC_LINE} {VERSION}"]
    lines.append(
        "meta "
        + json.dumps(
            metadata, sort_keys=True, default=convert_non_json_serializable_types
        )
    )
    payloads = []
    offset = 0
    for name in sorted(tensors):
        if not name or any(ch.isspace() for ch in name):
            raise InvalidInput(
                f"Tensor names must be non-empty without whitespace: {name!r}"
            )
        data = np.ascontiguousarray(tensors[name], dtype=DTYPE)
        blob = data.tobytes()
        shape = _format_shape(data.shape)
        lines.append(f"tensor {name} float32 {shape} {offset} {len(blob)}")
        payloads.append(blob)
        offset += len(blob)
    lines.append("end")
    path_or_file.write(("\n".join(lines) + "\n").encode("ascii"))
    for blob in payloads:
        path_or_file.write(blob)


def load_checkpoint(
    path_or_file: Union[str, os.PathLike, BinaryIO]
) -> Tuple[Dict[str, np.ndarray], Dict]:
    """
    Read a checkpoint written by `save_checkpoint`.

    Returns:
        Tuple[Dict[str, np.ndarray], Dict]: float32 tensors by name and the metadata.

    Raises:
        FormatError: If the header is malformed or a payload is truncated.
    """
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "rb") as file:
            return load_checkpoint(file)
    first = path_or_file.readline().decode("ascii", errors="replace").split()
    if len(first) != 2 or first[0] != MAGIC_LINE:
        raise FormatError("Not a gafdetect checkpoint")
    if first[1] != str(VERSION):
        raise FormatError(f"Unsupported checkpoint version {first[1]}")
    metadata = {}
    entries = []
    while True:
        raw = path_or_file.readline()
        if not raw:
            raise FormatError("Checkpoint header has no end marker")
        line = raw.decode("ascii", errors="replace").rstrip("\n")
        if line == "end":
            break
        kind, _, rest = line.partition(" ")
        if kind == "meta":
            try:
                metadata = json.loads(rest)
            except json.JSONDecodeError as e:
                raise FormatError(f"Bad checkpoint metadata: {e}") from e
        elif kind == "tensor":
            parts = rest.split(" ")
            if len(parts) != 5 or parts[1] != "float32":
                raise FormatError(f"Bad tensor entry: {line!r}")
            try:
                shape = _parse_shape(parts[2])
                entries.append((parts[0], shape, int(parts[3]), int(parts[4])))
            except ValueError as e:
                raise FormatError(f"Bad tensor entry: {line!r}") from e
        else:
            raise FormatError(f"Unexpected checkpoint header line: {line!r}")
    payload = path_or_file.read()
    tensors = {}
    for name, shape, offset, nbytes in entries:
        count = int(np.prod(shape)) if shape else 1
        if nbytes != count * DTYPE.itemsize or offset + nbytes > len(payload):
            raise FormatError(f"Tensor {name} payload is truncated or mis-sized")
        flat = np.frombuffer(payload, dtype=DTYPE, count=count, offset=offset)
        tensors[name] = flat.reshape(shape).copy()
    logger.debug("Loaded %d tensors from checkpoint", len(tensors))
    return tensors, metadata

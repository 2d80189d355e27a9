from typing import Any, Union
from enum import Enum
import datetime

from dateutil import parser as dateutil_parser
import numpy as np

from ..errors import InvalidInput

EPOCH = datetime.datetime(1970, 1, 1, tzinfo=datetime.timezone.utc)
ONE_MILLISECOND = datetime.timedelta(milliseconds=1)
ISO_FORMAT = "%Y-%m-%dT%H:%M:%S.%fZ"


def parse_timestamp(value: Union[str, int, np.integer]) -> int:
    """
    Convert an ISO-8601 string or an epoch-millisecond integer to epoch milliseconds.

    Strings without an explicit offset are read as UTC.

    Args:
        value (Union[str, int]): The timestamp to convert.

    Returns:
        int: Milliseconds since 1970-01-01T00:00:00Z.

    Raises:
        InvalidInput: If the value cannot be parsed.
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    try:
        parsed = dateutil_parser.isoparse(str(value).strip())
    except (ValueError, OverflowError) as e:
        raise InvalidInput(f"Unparseable timestamp: {value!r}") from e
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=datetime.timezone.utc)
    return (parsed - EPOCH) // ONE_MILLISECOND


def format_timestamp(epoch_ms: int) -> str:
    """
    Format epoch milliseconds as an ISO-8601 UTC string with millisecond precision.

    Args:
        epoch_ms (int): Milliseconds since the epoch.

    Returns:
        str: A string such as ``2000-01-01T00:01:00.000Z``.
    """
    moment = EPOCH + datetime.timedelta(milliseconds=int(epoch_ms))
    return moment.strftime(ISO_FORMAT)[:-4] + "Z"


def convert_non_json_serializable_types(obj: Any) -> Any:
    """
    JSON serializer for objects not serializable by default json code.

    Args:
        obj (Any): The object to be serialized.

    Returns:
        Any: A JSON-compliant representation of the object.

    Raises:
        TypeError: If the object is not serializable.
    """
    if isinstance(obj, datetime.datetime):
        return obj.strftime(ISO_FORMAT)
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, Enum):
        return obj.name
    raise TypeError("Type %s not serializable" % type(obj))


def round_half_away_from_zero(value: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(np.sign(value) * np.floor(abs(value) + 0.5))

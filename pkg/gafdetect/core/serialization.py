from dataclasses import fields
from enum import Enum
from typing import Any, Callable, ClassVar, Dict, TextIO, Union
import json
import os

from .utils import convert_non_json_serializable_types


def _to_plain(value: Any) -> Any:
    if isinstance(value, JsonSerializable):
        return value.to_dict()
    elif isinstance(value, Enum):
        return value.name
    elif isinstance(value, (list, tuple)):
        return [_to_plain(item) for item in value]
    elif isinstance(value, dict):
        return {
            (k.name if isinstance(k, Enum) else str(k)): _to_plain(v)
            for k, v in value.items()
        }
    return value


class JsonSerializable:
    """
    Mixin giving dataclasses a JSON representation.

    Subclasses are dataclasses. Field values are converted recursively: nested
    `JsonSerializable` objects become dictionaries, enums become their member names,
    tuples become lists. `_casters` maps a field name to a callable that rebuilds the
    field from its plain form when reading back.

    Methods:
        from_json: Class method to create an instance from a JSON file.
        from_dict: Class method to create an instance from a dictionary.
        to_dict: Converts the instance to a dictionary.
        to_json: Serializes the instance to a JSON file.
    """

    _casters: ClassVar[Dict[str, Callable[[Any], Any]]] = {}

    def to_dict(self) -> Dict[str, Any]:
        """
        Converts the instance to a dictionary of JSON-compatible values.

        Returns:
            Dict[str, Any]: The field names mapped to their plain values.
        """
        return {f.name: _to_plain(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data_dict: Dict[str, Any]):
        """
        Instantiates an object from its dictionary representation.

        Args:
            data_dict (Dict): Field names mapped to plain values, as produced by `to_dict`.

        Returns:
            An instance of the class.

        Raises:
            TypeError: If a required field is missing or a value cannot be cast.
        """
        kwargs = {}
        for name, value in data_dict.items():
            caster = cls._casters.get(name)
            if caster is not None and value is not None:
                value = caster(value)
            kwargs[name] = value
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise TypeError(f"Error while constructing {cls.__name__}: {str(e)}") from e

    def to_json(self, path_or_file: Union[str, os.PathLike, TextIO]) -> None:
        """
        Serializes the instance to a JSON file or stream.

        Keys are sorted so that equal objects always produce identical bytes.

        Args:
            path_or_file (Union[str, os.PathLike, TextIO]): The file path or file-like object
                                                            where the JSON should be saved.
        """
        if isinstance(path_or_file, (str, os.PathLike)):
            with open(path_or_file, "w") as file:
                self.to_json(file)
            return
        json.dump(
            self.to_dict(),
            path_or_file,
            indent=2,
            sort_keys=True,
            default=convert_non_json_serializable_types,
        )
        path_or_file.write("\n")

    @classmethod
    def from_json(cls, path_or_file: Union[str, os.PathLike, TextIO]):
        """
        Creates an instance by reading from a JSON file or file-like object.

        Args:
            path_or_file (Union[str, os.PathLike, TextIO]): The path to a JSON file or a
                                                            file-like object.

        Returns:
            An instance of the class.
        """
        if isinstance(path_or_file, (str, os.PathLike)):
            with open(path_or_file, "r") as file:
                data = json.load(file)
        else:
            data = json.load(path_or_file)
        return cls.from_dict(data)

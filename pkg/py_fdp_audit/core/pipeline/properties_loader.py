import json
import tomllib
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Type

import cachetools
import yaml

from py_fdp_audit.core.pipeline.stage_properties import StageProperties

EXTENSION_LOADERS: dict[str, Callable[[str], Any]] = {
    "json": json.loads,
    "yaml": yaml.safe_load,
    "yml": yaml.safe_load,
    "toml": tomllib.loads,
}


class InvalidPropertiesKeyError(Exception): ...


class InvalidOverrideError(ValueError): ...


def get_file_extension(file_path: str) -> str:
    suffix = Path(file_path).suffix
    if not suffix:
        raise ValueError(f"[UNKNOWN CONFIG FORMAT] {file_path} has no extension; use .toml, .yaml, .yml or .json")
    return suffix[1:].lower()


@cachetools.cached(cache=cachetools.LRUCache(maxsize=64))
def parse_document(file_extension: str, file_content: str) -> Mapping[str, Any]:
    loader = EXTENSION_LOADERS.get(file_extension)
    if loader is None:
        raise ValueError(f"[UNKNOWN CONFIG FORMAT] cannot read .{file_extension} pipeline configs")
    document = loader(file_content) or {}
    if not isinstance(document, dict):
        raise ValueError(f"[INVALID PROPERTIES DOCUMENT] top level must be a mapping, got {type(document).__name__}")
    return document


def parse_override(text: str) -> tuple[list[str], Any]:
    """Splits `section.field=value`; the value is read as a YAML scalar or list."""
    path, separator, raw_value = text.partition("=")
    keys = [key.strip() for key in path.split(".")]
    if not separator or len(keys) < 2 or not all(keys):
        raise InvalidOverrideError(f"[INVALID OVERRIDE] expected section.field=value, got {text!r}")
    return keys, yaml.safe_load(raw_value)


def apply_overrides(document: Mapping[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    merged: dict[str, Any] = {key: dict(value) if isinstance(value, dict) else value for key, value in document.items()}
    for text in overrides:
        keys, value = parse_override(text)
        node = merged
        for key in keys[:-1]:
            child = node.get(key)
            if child is None:
                child = node[key] = {}
            elif not isinstance(child, dict):
                raise InvalidOverrideError(f"[INVALID OVERRIDE] {key!r} in {text!r} is not a section")
            else:
                child = node[key] = dict(child)
            node = child
        node[keys[-1]] = value
    return merged


class PropertiesLoader:
    """
    Loads a keyed pipeline config (JSON, YAML or TOML) and validates each top-level section
    against the `StageProperties` class registered under that key.
    """

    def __init__(self, properties_path: str, properties_classes: Iterable[Type[StageProperties]]) -> None:
        self.properties_path = properties_path
        self.file_extension = get_file_extension(properties_path)
        self.properties_class_map: dict[str, Type[StageProperties]] = {
            _cls.get_key(): _cls for _cls in properties_classes
        }

    @property
    def available_properties_keys(self) -> list[str]:
        return list(self.properties_class_map.keys())

    def read_document(self) -> Mapping[str, Any]:
        with open(self.properties_path, "r") as file:
            return parse_document(self.file_extension, file.read())

    def load_properties(self, overrides: Iterable[str] = ()) -> dict[str, StageProperties]:
        return self.validate_document(apply_overrides(self.read_document(), overrides))

    def validate_document(self, document: Mapping[str, Any]) -> dict[str, StageProperties]:
        properties: dict[str, StageProperties] = {}
        for key, value in document.items():
            if key not in self.properties_class_map:
                raise InvalidPropertiesKeyError(
                    f"[UNKNOWN CONFIG SECTION] unknown pipeline section [{key}]; expected one of {', '.join(self.available_properties_keys)}"
                )
            properties[key] = self.properties_class_map[key].model_validate(value or {})
        return properties

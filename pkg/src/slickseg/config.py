"""Flat ``key = value`` configuration files for :class:`SegmentationConfig`.

One pair per line, ``#`` starts a comment. Keys are the config field names;
``init`` takes a geometry string such as ``rect:10,10,60,60``.
"""
from __future__ import annotations

import configparser
import dataclasses

from .levelset import parse_geometry
from .pipeline import SegmentationConfig

_SECTION = "slickseg"
_FIELDS = {f.name: f for f in dataclasses.fields(SegmentationConfig)}


class ConfigError(ValueError):
    pass


def _read_flat(text: str, source: str) -> dict[str, str]:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None,
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return dict(parser[_SECTION])


def coerce(key: str, value: str):
    """Convert the string *value* to the type of config field *key*."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    value = value.strip()
    if key == "init":
        return None if value in ("", "none", "default") else parse_geometry(value)
    if key == "model":
        return value
    if key == "safeguard":
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"safeguard must be true or false, got {value!r}")
        return low in ("true", "1", "yes")
    if key == "max_iters":
        return int(value)
    return float(value)


def config_from_mapping(values: dict[str, str], base: SegmentationConfig | None = None):
    base = base or SegmentationConfig()
    changes = {}
    for key, raw in values.items():
        try:
            changes[key] = coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    try:
        return base.replace(**changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str, base: SegmentationConfig | None = None, source: str = "<config>"):
    return config_from_mapping(_read_flat(text, source), base)


def load_config(path, base: SegmentationConfig | None = None) -> SegmentationConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base, str(path))


def dump_config(cfg: SegmentationConfig) -> str:
    """Serialize every field; :func:`parse_config` reads it back to an equal config."""
    lines = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if name == "init":
            text = "none" if value is None else value.spec()
        elif isinstance(value, bool):
            text = str(value).lower()
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"

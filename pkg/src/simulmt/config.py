"""Flat ``key = value`` configuration files.

Keys are CLI flag names without the leading dashes (``k``, ``strategy``,
``max-tokens-per-word``; underscores are accepted too).  ``#`` and ``;``
start comment lines.  Values are kept as strings and typed by the CLI.
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigurationError

_SECTION = "simulmt"


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("_", "-").lower()


def load_config(path) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8-sig")
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None, strict=True)
    parser.optionxform = normalize_key
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}".replace("\n", " ")) from None
    if parser.sections() != [_SECTION]:
        raise ConfigurationError(f"{path}: sections are not supported, use flat key = value lines")
    return dict(parser[_SECTION])


def parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {value!r}")

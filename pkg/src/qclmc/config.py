"""Flat ``key = value`` files for parameters and study settings.

The format is the flat subset of TOML: one assignment per line, numbers,
quoted strings, booleans and one-level lists.  Comments start with ``#``.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidArgument


def read_kv(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InvalidArgument(f"{path}: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise InvalidArgument(f"{path}: tables are not supported ({nested[0]})")
    return data


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise InvalidArgument(f"cannot serialize {type(v).__name__}")


def dumps_kv(data: Mapping[str, Any], header: str | None = None) -> str:
    lines = [f"# {line}" for line in header.splitlines()] if header else []
    lines += [f"{k} = {_fmt(v)}" for k, v in data.items()]
    return "\n".join(lines) + "\n"


def write_kv(path: str | Path, data: Mapping[str, Any], header: str | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_kv(data, header))
    return path

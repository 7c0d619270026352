"""
Deterministic CSV and JSON artifacts.

Floats are printed with 17 significant digits, rows keep the order they are given in and
lines end with LF, so two runs of the same configuration give byte-identical files. Files
are written to a temporary name in the destination directory and moved into place once
complete.
"""

import csv
import enum
import json
import math
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Generator, Iterable, Sequence

INF_SENTINEL = "INF"


def format_value(value: Any) -> str:
    """
    Examples:
        >>> format_value(0.1)
        '0.10000000000000001'
        >>> format_value(float("inf"))
        'INF'
    """
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isinf(value):
            return INF_SENTINEL if value > 0 else f"-{INF_SENTINEL}"
        return "%.17g" % value
    return str(value)


@contextmanager
def atomic_path(path: Path | str) -> Generator[Path, None, None]:
    """
    Yield a temporary path next to `path`; it replaces `path` when the context exits cleanly.

    Raises:
        OSError: if the destination directory cannot be created or written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="", encoding="utf-8") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    return Path(path)


def read_csv(path: Path | str) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fp:
        return list(csv.DictReader(fp))


def jsonable(value: Any) -> Any:
    """
    Replace non-finite floats so the payload is strict JSON: +inf and -inf become the INF
    sentinel with its sign, nan becomes null.

    Examples:
        >>> jsonable({"T": float("inf"), "v": [1.0, float("-inf")]})
        {'T': 'INF', 'v': [1.0, '-INF']}
    """
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return INF_SENTINEL if value > 0 else f"-{INF_SENTINEL}"
    return value


def write_json(path: Path | str, payload: Any) -> Path:
    with atomic_path(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fp:
            json.dump(jsonable(payload), fp, indent=2, sort_keys=True, allow_nan=False)
            fp.write("\n")
    return Path(path)


__all__ = [
    "INF_SENTINEL",
    "atomic_path",
    "format_value",
    "jsonable",
    "read_csv",
    "write_csv",
    "write_json",
]

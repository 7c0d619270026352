from .pool import parallel_map
from .schema import RunResult
from .store import (
    INF_SENTINEL,
    atomic_path,
    format_value,
    jsonable,
    read_csv,
    write_csv,
    write_json,
)

__all__ = [
    "INF_SENTINEL",
    "RunResult",
    "atomic_path",
    "format_value",
    "jsonable",
    "parallel_map",
    "read_csv",
    "write_csv",
    "write_json",
]

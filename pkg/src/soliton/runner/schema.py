"""
Records describing a finished command, written next to its artifacts.
"""

from typing import Any

from ..schema import BaseModel
from .store import jsonable


class RunResult(BaseModel):
    """
    The result of a command run by the CLI.
    """

    command: list[str]
    """
    The command and subcommand that were run.
    """
    outputs: list[str] = []
    """
    Paths of the artifacts written, in the order they were written.
    """
    summary: Any = None
    """
    A small JSON-compatible digest of the result, printed to stdout.
    """
    failed_cells: int = 0
    """
    Cells that raised and were recorded as UNDECIDED or INF.
    """
    exit_code: int = 0
    """
    The exit status of the command.
    """

    def to_primitive(self) -> Any:
        return jsonable(self.model_dump())

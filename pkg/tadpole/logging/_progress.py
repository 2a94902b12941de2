from __future__ import annotations

import logging
import sys
from collections.abc import Sequence
from typing import Any

_PROGRESS_LOGGER = logging.getLogger("tadpole.progress")


class CsvProgress:
    """Training progress as CSV lines on standard output.

    The header goes out with the first row. Rows are also kept in memory so
    the caller can persist the exact same text with `to_csv`.

    Floats are written with `repr`, which round-trips, so two identical runs
    produce byte-identical progress.
    """

    def __init__(self, columns: Sequence[str], *, echo: bool = True) -> None:
        self._columns = tuple(columns)
        self._rows: list[str] = []
        self._echo = echo
        if echo:
            _ensure_stdout_handler()

    @property
    def columns(self) -> tuple[str, ...]:
        return self._columns

    @property
    def rows(self) -> tuple[str, ...]:
        return tuple(self._rows)

    def emit(self, *values: float) -> None:
        if len(values) != len(self._columns):
            raise ValueError(
                f"Expected {len(self._columns)} values ({self._columns}). "
                f"We got {len(values)}."
            )
        if not self._rows and self._echo:
            _PROGRESS_LOGGER.info(",".join(self._columns))
        row = ",".join(_format(value) for value in values)
        self._rows.append(row)
        if self._echo:
            _PROGRESS_LOGGER.info(row)

    def to_csv(self) -> str:
        lines = [",".join(self._columns), *self._rows]
        return "\n".join(lines) + "\n"


def _format(value: float) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


class _StdoutHandler(logging.StreamHandler):  # type: ignore[type-arg]
    """Writes to whatever `sys.stdout` is at the time of the record."""

    @property  # type: ignore[override]
    def stream(self) -> Any:
        return sys.stdout

    @stream.setter
    def stream(self, value: Any) -> None:
        pass


def _ensure_stdout_handler() -> None:
    if _PROGRESS_LOGGER.handlers:
        return
    handler = _StdoutHandler()
    handler.setFormatter(logging.Formatter("%(message)s"))
    _PROGRESS_LOGGER.addHandler(handler)
    _PROGRESS_LOGGER.setLevel(logging.INFO)
    # Progress is data, not diagnostics. Keep it out of the root handlers.
    _PROGRESS_LOGGER.propagate = False

from __future__ import annotations

import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

_LOGGER = logging.getLogger(__name__)


@contextmanager
def atomic_output(path: Path) -> Iterator[Path]:
    """Yield a temporary sibling of `path` and move it into place on success.

    On error the temporary file is removed and `path` is left untouched.
    The temporary name keeps the suffix so that writers that pick the format
    from the extension still work.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = path.with_name(f".{path.stem}.{os.getpid()}.tmp{path.suffix}")
    try:
        yield temp
        os.replace(temp, path)
    except BaseException:
        if temp.exists():
            temp.unlink()
        _LOGGER.debug("Discarded the partial output for '%s'", path)
        raise


def atomic_write_bytes(path: Path, data: bytes) -> None:
    with atomic_output(path) as temp:
        temp.write_bytes(data)


def atomic_write_text(path: Path, text: str) -> None:
    with atomic_output(path) as temp:
        temp.write_text(text, encoding="utf8")

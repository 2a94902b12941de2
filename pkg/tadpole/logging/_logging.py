import logging
import os
from collections.abc import Iterable
from typing import Literal

LogLevel = Literal["debug", "info", "warning", "error", "critical"]
HandlerName = Literal["stderr", "null"]

_FORMAT = "%(asctime)s - %(process)s - %(name)s - %(levelname)s - %(message)s"


def initialize_logging(
    *,
    logger: logging.Logger | None = None,
    level: LogLevel | None = None,
    handlers: Iterable[HandlerName] | None = None,
) -> None:
    """Configure the global logging framework.

    Call this once during startup. Training progress does not go through
    here; see `CsvProgress`.
    """
    if logger is None:
        logger = logging.getLogger()

    if level is None:
        level = "debug" if "DEBUG" in os.environ else "info"
    logger.setLevel(level.upper())

    logging.captureWarnings(capture=True)

    if handlers is None:
        handlers = ("stderr",)
    for handler_name in handlers:
        match handler_name:
            case "stderr":
                _add_stderr_handler(logger)
            case "null":
                logger.addHandler(logging.NullHandler())
            case other:
                raise RuntimeError(f"Unknown '{other}' log handler")


def _add_stderr_handler(logger: logging.Logger) -> None:
    stderr_handler = logging.StreamHandler()  # Default stream is stderr
    stderr_handler.setFormatter(logging.Formatter(_FORMAT))
    logger.addHandler(stderr_handler)

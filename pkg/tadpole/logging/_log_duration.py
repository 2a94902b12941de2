import logging
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from time import perf_counter

_LOGGER = logging.getLogger(__name__)

TimeFunc = Callable[[], float]


@contextmanager
def log_duration(
    what: str,
    *,
    time_func: TimeFunc | None = None,
    logger: logging.Logger | None = None,
    log_level: int | None = None,
) -> Iterator[None]:
    """Time the wrapped block and log "<what> took X seconds"."""
    if time_func is None:
        time_func = perf_counter
    if logger is None:
        logger = _LOGGER
    if log_level is None:
        log_level = logging.DEBUG
    log_message = "%s took %.3f seconds"
    begin = time_func()
    try:
        yield
    except BaseException as exc:
        log_message += f" (exited early due to {type(exc).__name__})"
        raise
    finally:
        logger.log(log_level, log_message, what, time_func() - begin)

from ._log_duration import log_duration
from ._logging import initialize_logging
from ._progress import CsvProgress

__all__ = (
    "CsvProgress",
    "initialize_logging",
    "log_duration",
)

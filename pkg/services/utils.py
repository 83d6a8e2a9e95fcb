import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Optional

_LOGGER_NAME = "dd_observer"
_configured = False


def _get_logger() -> logging.Logger:
    global _configured
    logger = logging.getLogger(_LOGGER_NAME)
    if not _configured:
        import config

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.setLevel(config.get_log_level())
        logger.propagate = False
        _configured = True
    return logger


def set_log_level(level: str) -> None:
    """Change the level of the observer logger (e.g. from --verbose)."""
    _get_logger().setLevel(level.upper())


def log(message: str, node: str = "SYSTEM", level: str = "INFO") -> None:
    """Centralized logging function.

    Writes to stderr so CSV output on stdout stays clean.

    Args:
        message: Log message
        node: Component name (e.g., "refine", "harness")
        level: Log level (INFO, WARNING, ERROR, DEBUG)
    """
    logger = _get_logger()
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO
    if not logger.isEnabledFor(numeric_level):
        return
    timestamp = time.strftime("%Y-%m-%d %H:%M:%S")
    logger.log(numeric_level, f"[{timestamp}] [{level:5s}] [{node:15s}] {message}")


@contextmanager
def stopwatch(result: Optional[list] = None) -> Iterator[list]:
    """Measure wall time of a block in milliseconds.

    The elapsed time is appended to ``result`` (a fresh list if not given).
    """
    bucket = [] if result is None else result
    start = time.perf_counter()
    try:
        yield bucket
    finally:
        bucket.append((time.perf_counter() - start) * 1000.0)

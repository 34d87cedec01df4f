"""Logging configuration for the errorfloor toolkit."""

import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Generator, Optional, Union

from errorfloor.constants import DEFAULT_DEBUG_LOG_FILE


class UTCFormatter(logging.Formatter):
    """Custom formatter that uses UTC timestamps."""

    def formatTime(self, record, datefmt=None):
        """Override formatTime to use UTC."""
        stamp = datetime.fromtimestamp(record.created, tz=timezone.utc)
        if datefmt:
            return stamp.strftime(datefmt)
        return stamp.strftime("%Y-%m-%d %H:%M:%S,%f")[:-3] + "Z"


def _resolve_level(level: Union[str, int, None]) -> int:
    if level is None:
        return logging.WARNING
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.strip().upper())
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level: {level}")
    return resolved


def setup_logging(
    debug: bool = False,
    level: Union[str, int, None] = None,
    log_file: Optional[Path] = None,
) -> None:
    """
    Set up logging configuration for the toolkit.

    Args:
        debug: Enable debug mode with verbose logging and a debug log file
        level: Log level name or number used when debug is off
               (default WARNING)
        log_file: Optional log file path. Defaults to errorfloor_debug.log
                 in current directory when debug is active
    """
    effective = logging.DEBUG if debug else _resolve_level(level)
    logging.disable(logging.NOTSET)

    root_logger = logging.getLogger()
    root_logger.setLevel(effective)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(effective)
    console_handler.setFormatter(
        UTCFormatter("%(asctime)s %(levelname)s: %(name)s - %(message)s")
    )
    root_logger.addHandler(console_handler)

    if effective > logging.DEBUG:
        return

    if log_file is None:
        log_file = Path.cwd() / DEFAULT_DEBUG_LOG_FILE

    file_handler = logging.FileHandler(log_file, mode="a")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(
        UTCFormatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    )
    root_logger.addHandler(file_handler)

    logging.getLogger(__name__).debug(
        f"Debug logging enabled. Log file: {log_file}"
    )


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for the given name."""
    return logging.getLogger(name)


@contextmanager
def timer(
    logger: logging.Logger, operation: str
) -> Generator[None, None, None]:
    """Context manager to time operations and log the duration."""
    start_time = time.perf_counter()
    logger.debug(f"Starting {operation}")
    try:
        yield
    finally:
        duration = time.perf_counter() - start_time
        logger.debug(f"Completed {operation} in {duration:.3f}s")

"""Logging configuration for FaberPhase.

Console output goes to stderr so that subcommands printing JSON to stdout
stay machine-readable. Each experiment run also appends to a rotating
``faberphase.log`` in its output directory, and every event emitted while a
run is active carries the run's command and seed.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from structlog.typing import EventDict, FilteringBoundLogger, Processor

from .constants import DEFAULT_LOG_LEVEL

LOG_FILE_MAX_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 3


def numpy_to_builtin(_logger: Any, _method: str, event_dict: EventDict) -> EventDict:
    """Turn numpy scalars and small arrays in an event into plain Python values."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray) and value.size <= 8:
            event_dict[key] = value.tolist()
    return event_dict


def _processors(enable_json: bool) -> list[Processor]:
    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        numpy_to_builtin,
    ]
    if enable_json:
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
    return processors


def _file_handler(log_file: Path, level: int) -> RotatingFileHandler:
    log_file = Path(log_file).expanduser()
    log_file.parent.mkdir(parents=True, exist_ok=True)
    handler = RotatingFileHandler(
        filename=str(log_file),
        maxBytes=LOG_FILE_MAX_BYTES,
        backupCount=LOG_FILE_BACKUPS,
        encoding="utf-8",
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    return handler


def configure_logging(
    log_level: str = DEFAULT_LOG_LEVEL,
    log_file: Path | None = None,
    enable_json: bool = False,
) -> FilteringBoundLogger:
    """Configure structured logging for solver runs and experiments.

    Args:
        log_level: Logging level name; unknown names fall back to INFO
        log_file: Optional run log, rotated at 10 MB
        enable_json: Render events as JSON lines instead of console text

    Returns:
        Configured logger instance

    Example:
        >>> logger = configure_logging(log_level="DEBUG")
        >>> logger.info("Eigensolve finished", lambda1=5.7832, iterations=14)
    """
    level = getattr(logging, log_level.upper(), logging.INFO)
    if not isinstance(level, int):
        level = logging.INFO

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)
    if log_file:
        logging.getLogger().addHandler(_file_handler(log_file, level))

    structlog.configure(
        processors=_processors(enable_json),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    return structlog.get_logger()


def bind_run_context(**context: Any) -> None:
    """Attach ``context`` (e.g. command and seed) to every later event of this run."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**context)


def get_logger(name: str) -> FilteringBoundLogger:
    """Get a logger instance for a specific module."""
    return structlog.get_logger(name)


class LoggerMixin:
    """Mixin adding a class-named structlog logger.

    Example:
        >>> class SweepCoordinator(LoggerMixin):
        ...     def run(self):
        ...         self.logger.info("Sweep started", tasks=3)
    """

    @property
    def logger(self) -> FilteringBoundLogger:
        """Get logger for this class."""
        return structlog.get_logger(self.__class__.__name__)

"""Tests for logging configuration."""

import logging
from logging.handlers import RotatingFileHandler

import numpy as np
import pytest
import structlog

from faberphase.logging_config import (
    LoggerMixin,
    bind_run_context,
    configure_logging,
    get_logger,
    numpy_to_builtin,
)


@pytest.fixture(autouse=True)
def restore_root_logger():
    """Drop handlers added by a test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers = handlers
    root.setLevel(level)


class TestConfigureLogging:
    """Test configure_logging."""

    def test_level(self):
        """The root level follows the argument."""
        configure_logging("WARNING")
        assert logging.getLogger().level == logging.WARNING

    def test_unknown_level_falls_back_to_info(self):
        """Unknown names fall back to INFO."""
        configure_logging("CHATTY")
        assert logging.getLogger().level == logging.INFO

    def test_log_file(self, tmp_path):
        """A rotating file handler is attached and its directory created."""
        log_file = tmp_path / "out" / "faberphase.log"
        configure_logging("DEBUG", log_file=log_file)
        handlers = [h for h in logging.getLogger().handlers if isinstance(h, RotatingFileHandler)]
        assert len(handlers) == 1
        assert log_file.parent.is_dir()
        assert handlers[0].level == logging.DEBUG

    def test_returns_logger(self):
        """The configured logger can log key-value events."""
        logger = configure_logging("INFO", enable_json=True)
        logger.info("Eigensolve finished", lambda1=5.78, iterations=12)


class TestLoggerMixin:
    """Test LoggerMixin."""

    def test_logger_property(self):
        """Classes using the mixin get a logger."""

        class Runner(LoggerMixin):
            pass

        assert Runner().logger is not None
        assert get_logger("faberphase.test") is not None


class TestProcessors:
    """Test the custom processors."""

    def test_numpy_to_builtin(self):
        """numpy scalars and short arrays become plain values; long arrays are left alone."""
        long = np.zeros(100)
        event = numpy_to_builtin(
            None, "info", {"lambda1": np.float64(5.78), "iterations": np.int64(12), "xs": np.arange(3), "w": long}
        )
        assert type(event["lambda1"]) is float
        assert type(event["iterations"]) is int
        assert event["xs"] == [0, 1, 2]
        assert event["w"] is long

    def test_bind_run_context(self):
        """Bound context replaces any earlier run's context."""
        bind_run_context(command="eig", seed=3)
        bind_run_context(command="sweep", seed=7)
        try:
            assert structlog.contextvars.get_contextvars() == {"command": "sweep", "seed": 7}
        finally:
            structlog.contextvars.clear_contextvars()

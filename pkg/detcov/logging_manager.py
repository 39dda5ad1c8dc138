#!/usr/bin/env python3.11

"""
LoggingManager

A small logging manager for configuring and using the package loggers.

Every class in detcov obtains its logger with
``LoggingManager(__name__).logger``. The root handler is configured once and
writes to stderr, so reports written to stdout are never interleaved with log
records.

The level is taken, in order, from the ``log_level`` argument, the
``DETCOV_LOG_LEVEL`` environment variable, and finally ``logging.WARNING``.

Example:
    If this module is run as a standalone script, it demonstrates the basic
    usage of the `LoggingManager` by logging messages at different levels.
"""

# First-party imports
import logging
import sys
from os import environ
from typing import Optional

LOG_LEVEL_ENV = "DETCOV_LOG_LEVEL"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
PACKAGE_LOGGER = "detcov"


def _level_from_env() -> int:
    value = environ.get(LOG_LEVEL_ENV, "").strip().upper()
    if not value:
        return logging.WARNING
    if value.isdigit():
        return int(value)
    level = logging.getLevelName(value)
    return level if isinstance(level, int) else logging.WARNING


class LoggingManager:
    """
    A simple logging manager class for configuring and using a logger.

    Args:
        name (str): The name of the logger, which helps identify the source of log messages.
        log_level (int, optional): The logging level to use. Defaults to the
            ``DETCOV_LOG_LEVEL`` environment variable, or WARNING.

    Attributes:
        logger (logging.Logger): The logger instance.
    """

    _configured = False

    def __init__(self, name: str, log_level: Optional[int] = None) -> None:
        """
        Initialize the LoggingManager, configuring the package handler on first use.
        """
        if not LoggingManager._configured:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter(LOG_FORMAT))
            package_logger = logging.getLogger(PACKAGE_LOGGER)
            package_logger.addHandler(handler)
            package_logger.setLevel(_level_from_env())
            LoggingManager._configured = True
        if log_level is not None:
            LoggingManager.set_level(log_level)
        self.logger = logging.getLogger(name)

    @staticmethod
    def set_level(log_level: int) -> None:
        """
        Change the level of every detcov logger.

        Args:
            log_level (int): The new logging level.
        """
        logging.getLogger(PACKAGE_LOGGER).setLevel(log_level)

    @staticmethod
    def level_for_verbosity(verbosity: int) -> int:
        """
        Map a count of ``-v`` flags to a logging level.

        Args:
            verbosity (int): Number of ``-v`` flags given on the command line.

        Returns:
            int: WARNING for 0, INFO for 1, DEBUG for 2 or more.
        """
        if verbosity <= 0:
            return logging.WARNING
        if verbosity == 1:
            return logging.INFO
        return logging.DEBUG


if __name__ == "__main__":
    # Example usage
    logger = LoggingManager("detcov.demo", logging.DEBUG).logger
    logger.debug("This is a debug message.")
    logger.info("This is an info message.")
    logger.warning("This is a warning message.")
    logger.error("This is an error message.")
    logger.critical("This is a critical message.")

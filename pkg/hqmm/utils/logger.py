"""Logging for the CLI and services.

Records go to stderr; stdout carries CSV reports and JSON documents only.
"""

import logging
import sys

from hqmm.config import settings

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def setup_logger(name: str | None = None) -> logging.Logger:
    """Return the named logger with a single stderr handler attached."""
    logger = logging.getLogger(name or __name__)
    logger.setLevel(_level(settings.log_level))

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        logger.addHandler(handler)

    return logger


def set_level(level: str) -> None:
    """Override the configured level, e.g. from ``--log-level``."""
    logger.setLevel(_level(level))


logger = setup_logger("hqmm")

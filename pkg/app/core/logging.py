"""Logging configuration."""
import logging
import sys
from pathlib import Path
from typing import Optional

from app.core.config import settings

LOGGER_NAME = "equinet"
CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def setup_logging(log_file: Optional[Path] = None) -> logging.Logger:
    """
    Configure the ``equinet`` logger once per process.

    The console handler writes to stderr at ``EQUINET_LOG_LEVEL``; stdout is
    left to command output such as the ``check-kernels`` CSV. With
    ``EQUINET_LOG_TO_FILE`` a DEBUG file handler is added.

    Args:
        log_file: File for the DEBUG handler (default: logs/app.log)
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)

    if logger.handlers:
        return logger

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(_level(settings.LOG_LEVEL))
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        log_file = log_file or settings.LOGS_DIR / "app.log"
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="a", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def set_console_level(level: str) -> None:
    """Change the level of the stderr handler only; the file handler keeps DEBUG."""
    for handler in logger.handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            handler.setLevel(_level(level))


# Global logger instance
logger = setup_logging()

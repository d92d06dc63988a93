import logging
import sys
from typing import Optional
from pathlib import Path

from pythonjsonlogger import jsonlogger

from config import settings

ROOT_LOGGER_NAME = "hamiltonian_learning"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logger(
    name: str,
    log_level: int = logging.INFO,
    log_file: Optional[Path] = None,
    json_format: bool = False
) -> logging.Logger:
    """
    Set up a logger with the specified configuration.

    Calling it again for the same name replaces the handlers instead of
    stacking duplicates.

    Args:
        name: Name of the logger
        log_level: Logging level (default: INFO)
        log_file: Optional path to log file
        json_format: Emit one JSON object per record instead of plain text

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(log_level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    if json_format:
        formatter: logging.Formatter = jsonlogger.JsonFormatter(LOG_FORMAT)
    else:
        formatter = logging.Formatter(LOG_FORMAT)

    # Console handler; stdout carries command results
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # File handler (if specified)
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """Child logger of the package logger, e.g. ``hamiltonian_learning.smc.particles``."""
    if name == ROOT_LOGGER_NAME or name.startswith(ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


# Create default logger
logger = setup_logger(
    ROOT_LOGGER_NAME,
    log_level=logging.getLevelName(settings.QHL_LOG_LEVEL.upper()),
    log_file=Path(settings.QHL_LOG_FILE) if settings.QHL_LOG_FILE else None,
    json_format=settings.QHL_LOG_FORMAT == "json",
)

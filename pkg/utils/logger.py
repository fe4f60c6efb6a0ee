# utils/logger.py
"""
Logging utility functions for the verification engine.

All module loggers share one console handler and one daily log file, so a run that
touches every service still holds a single open file.
"""
import os
import sys
import logging
from datetime import datetime
from typing import List, Optional

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

LOG_DIR_ENV = "KERNEL_VERIFY_LOG_DIR"
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CONSOLE_FORMAT = '%(levelname)s: %(message)s'

_shared: List[logging.Handler] = []
_managed: List[str] = []


def _log_file(log_dir: Optional[str] = None) -> str:
    logs_dir = log_dir or os.environ.get(LOG_DIR_ENV, "logs")
    os.makedirs(logs_dir, exist_ok=True)
    return os.path.join(logs_dir, f"kernel_verify_{datetime.now():%Y-%m-%d}.log")


def _shared_handlers(level: int) -> List[logging.Handler]:
    """Console and file handlers, created on first use."""
    if not _shared:
        file_handler = logging.FileHandler(_log_file(), encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        for handler in (file_handler, console_handler):
            handler.setLevel(level)
            _shared.append(handler)
    return _shared


def get_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """Return the named logger wired to the shared handlers."""
    logger = logging.getLogger(name)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    for handler in _shared_handlers(level):
        logger.addHandler(handler)
    logger.propagate = False
    if name not in _managed:
        _managed.append(name)
    return logger


def set_level(level: int) -> None:
    """Apply a level to every logger created through get_logger and to the shared handlers."""
    for name in _managed:
        logging.getLogger(name).setLevel(level)
    for handler in _shared:
        handler.setLevel(level)


def redirect_file(log_dir: str) -> None:
    """Move the shared file handler into log_dir."""
    if not _shared:
        return
    old = _shared[0]
    new = logging.FileHandler(_log_file(log_dir), encoding='utf-8')
    new.setFormatter(old.formatter)
    new.setLevel(old.level)
    for name in _managed:
        logger = logging.getLogger(name)
        logger.removeHandler(old)
        logger.addHandler(new)
    old.close()
    _shared[0] = new


def configure_global_logging(level: int = logging.INFO, log_dir: Optional[str] = None) -> None:
    """
    Configure global logging settings.

    Args:
        level: Logging level to set globally
        log_dir: Optional directory for the daily log file
    """
    logging.basicConfig(level=level, format=FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')
    set_level(level)
    if log_dir:
        redirect_file(log_dir)

    # Suppress noisy loggers
    logging.getLogger('multiprocessing').setLevel(logging.WARNING)

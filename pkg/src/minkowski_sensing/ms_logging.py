import logging

from pathlib import Path
from typing import Optional, Union

# Create a logger
logger = logging.getLogger("minkowski_sensing")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
WORKER_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [pid %(process)d] %(message)s"


def configure_logging(
    level: int = logging.WARNING,
    add_file_handler: bool = False,
    log_dir: Optional[Union[str, Path]] = None,
    log_file: Optional[str] = None,
) -> None:
    """
    Configure logging with the specified level.

    This function sets the logging level and ensures that the logger has a handler.

    Args:
    - level (int): Logging level (e.g., logging.DEBUG, logging.INFO)
    - add_file_handler (bool): Also write records to `log_dir / log_file`
    """
    _set_level(level, add_file_handler=add_file_handler, log_dir=log_dir, log_file=log_file)


def warning() -> None:
    """
    Set logging to a WARNING level.
    """
    _set_level(logging.WARNING)


def info() -> None:
    """
    Set logging to an INFO level.
    """
    _set_level(logging.INFO)


def debug() -> None:
    """
    Set logging to a DEBUG level.
    """
    _set_level(logging.DEBUG)


def error() -> None:
    """
    Set logging to an ERROR level.
    """
    _set_level(logging.ERROR)


def critical() -> None:
    """
    Set logging to a CRITICAL level.
    """
    _set_level(logging.CRITICAL)


def _set_level(
    level: int,
    add_file_handler: bool = False,
    log_dir: Optional[Union[str, Path]] = None,
    log_file: Optional[str] = None,
) -> None:
    """
    Set the logging level for the logger.

    Adds a StreamHandler with the package formatter if no handlers are present, and
    optionally a FileHandler writing to `log_dir / log_file`.

    Args:
    - level (int): Logging level (e.g., logging.DEBUG, logging.INFO)
    - add_file_handler (bool): Whether to attach a file handler
    - log_dir (Path): Directory for the log file, created if missing
    - log_file (str): File name inside `log_dir`
    """
    logger.setLevel(level)
    if add_file_handler:
        if log_dir is None or log_file is None:
            raise ValueError("Specify a log directory and filename if you want to store logs in a file!")
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_dir / log_file)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    if not logger.hasHandlers():
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)


def init_worker_logging(
    log_level: int = logging.WARNING, log_dir: Optional[str] = None, log_file: Optional[str] = None
):
    """
    Called once per worker process. Mirrors the main process level; when a log
    directory is given, records are appended to the same file as the parent.
    """
    logger.setLevel(log_level)

    # Workers share one file, so their lines interleave; the pid tells them apart.
    if log_dir is not None and log_file is not None:
        handler = logging.FileHandler(Path(log_dir) / log_file, mode="a")
    else:
        handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(WORKER_LOG_FORMAT))
    logger.addHandler(handler)


# Initialize logging with a default level (optional)
configure_logging(logging.WARNING)

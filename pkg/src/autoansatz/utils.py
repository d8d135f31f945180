import logging
import sys
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = "%(asctime)s %(levelname)s %(filename)s:%(lineno)d %(message)s"


def init_logging(
    console_level: Union[int, str] = "INFO",
    log_file: Optional[Path] = None,
    file_level: Union[int, str] = "DEBUG",
) -> None:
    """Route all log records to stderr (and optionally a file), replacing existing handlers."""
    formatter = logging.Formatter(LOG_FORMAT)

    logger = logging.getLogger()
    logger.setLevel(logging.NOTSET)
    # Clear any existing handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level.upper() if isinstance(console_level, str) else console_level)
    logger.addHandler(console_handler)

    if log_file is not None:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        file_handler.setLevel(file_level.upper() if isinstance(file_level, str) else file_level)
        logger.addHandler(file_handler)

"""Logging configuration for the command line entry point."""

import logging
from typing import Union

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def setup_logging(level: Union[str, int] = "INFO") -> None:
    """
    Configure the root logger once.

    Args:
        level: Level name ("DEBUG", "INFO", ...) or numeric level
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    # openai/httpx log every request at INFO
    logging.getLogger("httpx").setLevel(max(level, logging.WARNING))

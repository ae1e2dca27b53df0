"""
Logging setup for command-line runs. Library modules only create loggers.
"""

import logging
import sys

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = "INFO") -> logging.Logger:
    """
    Attach a single stream handler to the package logger

    Repeated calls keep the one handler and point it at the current
    sys.stderr, so swapped or captured streams are followed.

    Args:
        level: Logging level name

    Returns:
        The configured package logger
    """
    logger = logging.getLogger('src')
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    handler = next((h for h in logger.handlers if getattr(h, '_cbe_handler', False)), None)
    if handler is None:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._cbe_handler = True
        logger.addHandler(handler)
    elif handler.stream is not sys.stderr:
        # the previous stream may already be closed, so it is not flushed
        handler.stream = sys.stderr

    return logger

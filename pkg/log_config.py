"""
This module configures logging for the command-line tools.

Library modules only create loggers; handlers are installed here, once.
"""
import logging

from pythonjsonlogger import jsonlogger

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def setup_logging(level="INFO", json_format=True, log_file=None):
    """
    Installs a single handler on the root logger.

    :param level: The logging level name or number, defaults to "INFO".
    :type level: str or int
    :param json_format: Emit one JSON object per line when True, defaults to True.
    :type json_format: bool, optional
    :param log_file: Write to this file instead of stderr, defaults to None.
    :type log_file: str, optional
    :return: The configured root logger.
    :rtype: logging.Logger
    """
    handler = logging.FileHandler(log_file, encoding="utf-8") if log_file else logging.StreamHandler()
    if json_format:
        handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(LOG_FORMAT))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level.upper() if isinstance(level, str) else level)
    # matplotlib font discovery is chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    return root

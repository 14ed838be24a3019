"""
Logging for python_hardyverify.

Everything goes to stderr: stdout belongs to the JSON/CSV reports. Library
modules only call get_logger(__name__); the CLI calls setup_logging once.

Floating-point events raised by numpy (overflow of sinh far from the pole,
invalid operations in a user weight) are routed to the DEBUG level of the
package logger instead of being printed as RuntimeWarnings.
"""

import logging
import sys
from typing import Optional

import numpy as np

ROOT = "python_hardyverify"

DETAILED_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s"
SHORT_FORMAT = "%(levelname)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _handler(stream_or_file, level: int, detailed: bool) -> logging.Handler:
    if isinstance(stream_or_file, str):
        handler: logging.Handler = logging.FileHandler(stream_or_file, mode="a")
    else:
        handler = logging.StreamHandler(stream_or_file)
    handler.setLevel(level)
    handler.setFormatter(
        logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT) if detailed else logging.Formatter(SHORT_FORMAT)
    )
    return handler


def _route_floating_point_events() -> None:
    fp_logger = logging.getLogger(f"{ROOT}.floating_point")

    def record(kind: str, flag: int) -> None:
        fp_logger.debug(f"numpy floating-point {kind} (flag {flag})")

    np.seterrcall(record)
    np.seterr(over="call", invalid="call", divide="call", under="ignore")


def setup_logging(
    level: int = logging.WARNING,
    log_file: Optional[str] = None,
    verbose: bool = False,
    debug: bool = False,
) -> logging.Logger:
    """
    Configure the python_hardyverify logger.

    The console shows WARNING and above by default (non-converged integrals,
    flagged eigenvalue estimates, non-monotone ladders); --verbose adds the
    per-report INFO lines and --debug the panel counts and iteration traces
    in the detailed format. A log file always receives DEBUG.

    Example:
        >>> logger = setup_logging(verbose=True)
        >>> logger.info("sweep started")
    """
    if debug:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO

    logger = logging.getLogger(ROOT)
    logger.handlers.clear()
    logger.addHandler(_handler(sys.stderr, level, detailed=debug))
    logger.setLevel(level)
    if log_file:
        logger.addHandler(_handler(log_file, logging.DEBUG, detailed=True))
        logger.setLevel(logging.DEBUG)

    _route_floating_point_events()
    return logger


def get_logger(name: str) -> logging.Logger:
    """logger below python_hardyverify for a module (pass __name__)"""
    if name == ROOT or name.startswith(f"{ROOT}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT}.{name}")

"""structlog setup: diagnostics go to stderr, stdout stays reserved for data."""

import logging
import os
import sys

import structlog

from toroidal_matchings.constants import LOG_LEVEL_ENV_VAR


def configure_logging(level: str | None = None) -> None:
    resolved = (level or os.environ.get(LOG_LEVEL_ENV_VAR) or "WARNING").upper()
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelNamesMapping().get(resolved, logging.WARNING)
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )

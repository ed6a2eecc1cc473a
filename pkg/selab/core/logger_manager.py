"""
Centralized logger configuration and retrieval.

Structured JSON logs go through python-json-logger; the human-readable format
is kept for interactive CLI use.
"""

import logging
import logging.config
import sys
import time
import traceback
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Callable, Dict, Optional, TypeVar

from pythonjsonlogger import jsonlogger

F = TypeVar("F", bound=Callable[..., Any])

_NOISY_LOGGERS = ("matplotlib", "numba", "urllib3")


class LabJsonFormatter(jsonlogger.JsonFormatter):
    """
    JSON formatter for structured logging.
    """

    def add_fields(self, log_record, record, message_dict):
        """Add custom fields to the log record."""
        super().add_fields(log_record, record, message_dict)

        log_record["timestamp"] = datetime.now(timezone.utc).isoformat()
        log_record["level"] = record.levelname
        log_record["logger"] = record.name
        log_record["source"] = {
            "file": record.pathname,
            "line": record.lineno,
            "function": record.funcName,
        }

        extra_fields = getattr(record, "extra_fields", None)
        if extra_fields:
            log_record.update(extra_fields)
            log_record.pop("extra_fields", None)

        if record.exc_info and record.exc_info[0] is not None:
            log_record["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }

        for field in ("pathname", "lineno", "funcName", "exc_info", "exc_text"):
            log_record.pop(field, None)


def get_logging_config(level: str = "INFO", json_format: bool = True) -> Dict[str, Any]:
    """
    Returns a dictionary for Python's logging.config.dictConfig.

    Args:
        level: The root logging level, e.g., "INFO", "DEBUG".
        json_format: If True, use a structured JSON formatter. Otherwise, use a human-readable console format.
    """
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "json": {
                "()": LabJsonFormatter,
                "fmt": "%(message)s",
            },
            "console": {
                "format": "%(asctime)s %(levelname)-7s %(name)s: %(message)s",
            },
        },
        "handlers": {
            "default": {
                "formatter": "json" if json_format else "console",
                "class": "logging.StreamHandler",
                "stream": sys.stderr,
            },
        },
        "loggers": {
            "": {
                "handlers": ["default"],
                "level": level,
            },
            "selab": {
                "handlers": ["default"],
                "level": level,
                "propagate": False,
            },
        },
    }


def configure_logging(level: str = "INFO", json_format: bool = True) -> None:
    """Apply the lab logging configuration and quiet third-party loggers."""
    logging.config.dictConfig(get_logging_config(level.upper(), json_format))
    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance"""
    return logging.getLogger(name)


def log_execution_time(logger: Optional[logging.Logger] = None) -> Callable[[F], F]:
    """
    Decorator that logs function execution time.
    """

    def decorator(func: F) -> F:
        log = logger or get_logger(func.__module__)

        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration_ms = (time.perf_counter() - start_time) * 1000
                log.error(
                    f"{func.__name__} failed",
                    extra={
                        "function": func.__name__,
                        "duration_ms": duration_ms,
                        "status": "error",
                        "error_type": type(e).__name__,
                    },
                )
                raise
            duration_ms = (time.perf_counter() - start_time) * 1000
            log.debug(
                f"{func.__name__} completed",
                extra={"function": func.__name__, "duration_ms": duration_ms, "status": "success"},
            )
            return result

        return wrapper  # type: ignore[return-value]

    return decorator


def log_phase(
    logger: logging.Logger,
    phase: str,
    status: str,
    duration_ms: Optional[float] = None,
    **kwargs,
) -> None:
    """Log a pipeline phase with structured data"""
    extra_fields = {"event": "phase", "phase": phase, "status": status, **kwargs}

    if duration_ms is not None:
        extra_fields["duration_ms"] = duration_ms

    level = logging.INFO if status == "success" else logging.ERROR
    logger.log(level, f"{phase} - {status}", extra={"extra_fields": extra_fields})

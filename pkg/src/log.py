from __future__ import annotations

import json
import logging
import logging.config

from functools import wraps
from pathlib import Path
from time import perf_counter
from typing import Any
from typing import Callable
from typing import TypeVar

from src.config import PROJECT_ROOT
from src.config import UTF


T = TypeVar("T")

logger = logging.getLogger("repsample")


def configure_logging(config_path: Path) -> None:
    """Loads the dictConfig at `config_path`, creating any log directory it names."""
    with open(config_path, encoding=UTF) as f_in:
        log_config = json.load(f_in)
    for handler in log_config.get("handlers", {}).values():
        if "filename" in handler:
            Path(handler["filename"]).parent.mkdir(
                parents=True, exist_ok=True
            )
    logging.config.dictConfig(log_config)


configure_logging(PROJECT_ROOT / "logging_config.json")


def log_debug(func: Callable[..., T]) -> Callable[..., T]:
    """Decorator to log debug information for a function."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        result = func(*args, **kwargs)
        logger.debug("function=%s, result=%s", func.__name__, result)
        return result

    return wrapper


def get_time(func: Callable[..., T]) -> Callable[..., T]:
    """Decorator to log the wall time of a call at debug level."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        start_time = perf_counter()
        result = func(*args, **kwargs)
        logger.debug(
            '"%s()" took %.2f seconds to execute',
            func.__name__,
            perf_counter() - start_time,
        )
        return result

    return wrapper

from __future__ import annotations

import logging
import sys

try:  # python-json-logger >= 3.1 moved the formatter
    from pythonjsonlogger.json import JsonFormatter  # type: ignore
except ImportError:  # pragma: no cover
    from pythonjsonlogger.jsonlogger import JsonFormatter  # type: ignore

PLAIN_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(level: str | int = "INFO", json_format: bool = False) -> logging.Logger:
    """Install a single stderr handler on the package logger."""
    root = logging.getLogger("calibrec")
    for h in list(root.handlers):
        root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    if json_format:
        handler.setFormatter(JsonFormatter(JSON_FIELDS))
    else:
        handler.setFormatter(logging.Formatter(PLAIN_FORMAT))
    root.addHandler(handler)
    root.setLevel(level if isinstance(level, int) else level.upper())
    root.propagate = False
    return root

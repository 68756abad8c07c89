from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any

import numpy as np

from shapetime.core.config import Settings
from shapetime.core.context import command_ctx_var, run_id_ctx_var, seed_ctx_var

_RESERVED_ATTRS: frozenset[str] = frozenset(vars(logging.makeLogRecord({}))) | {"message", "taskName"}

_CONTEXT_KEYS = ("run_id", "command", "seed")


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


class RunContextFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id_ctx_var.get()
        record.command = command_ctx_var.get()
        record.seed = seed_ctx_var.get()
        return True


class JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        base: dict[str, Any] = {
            "ts": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }
        for key in _CONTEXT_KEYS:
            base[key] = getattr(record, key, "-")

        for key, value in record.__dict__.items():
            if key in _RESERVED_ATTRS or key in _CONTEXT_KEYS or key.startswith("_"):
                continue
            base[key] = _jsonable(value)

        if record.exc_info:
            base["exc_type"] = record.exc_info[0].__name__ if record.exc_info[0] else "Exception"
            base["exc"] = self.formatException(record.exc_info)

        return json.dumps(base, ensure_ascii=False, separators=(",", ":"), default=str)


def setup_logging(settings: Settings) -> None:
    level = getattr(logging, settings.log_level.upper(), logging.INFO)

    root = logging.getLogger()
    root.setLevel(level)

    for h in list(root.handlers):
        root.removeHandler(h)

    handler = logging.StreamHandler(stream=sys.stdout)
    handler.addFilter(RunContextFilter())

    if settings.log_json:
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s [%(name)s] %(run_id)s %(message)s"))

    root.addHandler(handler)

    # third-party loggers stay at WARNING or above
    for logger_name in ("torch", "numpy"):
        logging.getLogger(logger_name).setLevel(max(level, logging.WARNING))

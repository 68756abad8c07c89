from __future__ import annotations

from dataclasses import dataclass
from typing import Any

EXIT_RUNTIME_FAILURE = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class AppError(Exception):
    code: str
    exit_code: int = EXIT_RUNTIME_FAILURE
    log_detail: str | None = None
    extra: dict[str, Any] | None = None

    def __str__(self) -> str:
        return self.log_detail or self.code


class DimensionError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="dimension_mismatch", log_detail=log_detail)


class ParameterError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="invalid_parameter", log_detail=log_detail)


class ContractError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="contract_violation", log_detail=log_detail)


class NonFiniteError(AppError):
    def __init__(self, log_detail: str | None = None, *, sample: int | None = None, term: str | None = None) -> None:
        super().__init__(
            code="non_finite",
            log_detail=log_detail,
            extra={"sample": sample, "term": term},
        )


class ParseError(AppError):
    def __init__(self, log_detail: str | None = None, *, line: int | None = None) -> None:
        super().__init__(code="parse_error", exit_code=EXIT_USAGE, log_detail=log_detail, extra={"line": line})


class DatasetError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="dataset_error", exit_code=EXIT_USAGE, log_detail=log_detail)


class CheckpointError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="checkpoint_error", exit_code=EXIT_USAGE, log_detail=log_detail)


class UsageError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="usage_error", exit_code=EXIT_USAGE, log_detail=log_detail)


class ConfigError(AppError):
    def __init__(self, log_detail: str | None = None) -> None:
        super().__init__(code="config_error", exit_code=EXIT_USAGE, log_detail=log_detail)

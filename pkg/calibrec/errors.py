"""Exception hierarchy.

Exit codes used by the CLI:
  0 success, 1 usage/config error, 2 data error, 3 solver budget exhausted (strict mode)
"""
from __future__ import annotations

from typing import Optional


class CalibrecError(Exception):
    exit_code: int = 1


class ConfigError(CalibrecError, ValueError):
    exit_code = 1


class DataError(CalibrecError, ValueError):
    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None) -> None:
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class InstanceTooLarge(CalibrecError, ValueError):
    exit_code = 1


class SolverBudgetExceeded(CalibrecError):
    exit_code = 3


class RerankError(CalibrecError):
    """Per-user solver failure."""

    def __init__(self, user_id: str, cause: BaseException) -> None:
        self.user_id = user_id
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"user {user_id}: {cause}")


class StageError(CalibrecError):
    """Pipeline failure attributed to a stage (ingest, split, score, ...)."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2 if isinstance(cause, (ValueError, OSError)) else 1)
        super().__init__(f"[{stage}] {cause}")

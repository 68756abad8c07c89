from __future__ import annotations

from contextvars import ContextVar

run_id_ctx_var: ContextVar[str] = ContextVar("run_id", default="-")
command_ctx_var: ContextVar[str] = ContextVar("command", default="-")
seed_ctx_var: ContextVar[str] = ContextVar("seed", default="-")

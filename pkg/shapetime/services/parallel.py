from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from typing import TypeVar

from shapetime.core.context import seed_ctx_var

R = TypeVar("R")


def _with_seed(fn: Callable[[int], R], seed: int) -> R:
    token = seed_ctx_var.set(str(seed))
    try:
        return fn(seed)
    finally:
        seed_ctx_var.reset(token)


async def fan_out_seeds(fn: Callable[[int], R], seeds: Sequence[int], *, limit: int) -> list[R]:
    """Run fn once per seed in worker threads, at most `limit` at a time; results keep the order of `seeds`."""
    semaphore = asyncio.Semaphore(max(int(limit), 1))

    async def run(seed: int) -> R:
        async with semaphore:
            return await asyncio.to_thread(_with_seed, fn, seed)

    return list(await asyncio.gather(*(run(s) for s in seeds)))

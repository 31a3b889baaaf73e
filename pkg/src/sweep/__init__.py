"""Parallel evaluation of a function over a time grid."""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

GridFunction = Callable[[np.ndarray], np.ndarray]


async def evaluate_grid_async(fn: GridFunction, times: np.ndarray, threads: int) -> np.ndarray:
    """Split ``times`` into contiguous chunks and evaluate them concurrently.

    Results are reassembled in grid order, so the output does not depend on
    the worker count. The first failing chunk's exception is re-raised.
    """
    chunks = [chunk for chunk in np.array_split(np.asarray(times, dtype=float), threads) if chunk.size]
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        tasks = [loop.run_in_executor(pool, fn, chunk) for chunk in chunks]
        results = await asyncio.gather(*tasks, return_exceptions=True)
    for r in results:
        if isinstance(r, Exception):
            logger.error(f"grid evaluation failed: {r}")
            raise r
    return np.concatenate([np.asarray(r) for r in results])


def evaluate_grid(fn: GridFunction, times, threads: int = 1) -> np.ndarray:
    """Evaluate ``fn`` on ``times`` with up to ``threads`` workers."""
    times = np.asarray(times, dtype=float)
    threads = max(1, min(int(threads), times.size))
    if threads == 1:
        return np.asarray(fn(times))
    logger.debug(f"evaluating {times.size} time points on {threads} workers")
    return asyncio.run(evaluate_grid_async(fn, times, threads))


__all__ = ["evaluate_grid", "evaluate_grid_async"]

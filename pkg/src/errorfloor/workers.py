"""Process-pool helpers for embarrassingly parallel trials and frames."""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, Tuple

from errorfloor.logging_config import get_logger

logger = get_logger(__name__)


def default_workers() -> int:
    """Available parallelism, at least 1."""
    if hasattr(os, "sched_getaffinity"):
        return max(1, len(os.sched_getaffinity(0)))
    return max(1, os.cpu_count() or 1)


def run_ordered(
    fn: Callable[..., Any],
    jobs: Sequence[Tuple[Any, ...]],
    workers: int = 1,
) -> List[Any]:
    """
    Call fn(*job) for every job and return results in job order.

    With more than one worker the calls run in a process pool; fn and its
    arguments must then be picklable. Results never depend on the worker
    count, only on the job arguments.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    logger.debug(f"Dispatching {len(jobs)} jobs to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [future.result() for future in futures]

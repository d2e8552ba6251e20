"""Order-preserving map over independent tasks."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(n_jobs: int | None = None) -> int:
    """Resolve the worker count; ``KMR_THREADS`` caps it (0 means all cores)."""
    cores = os.cpu_count() or 1
    if n_jobs is None:
        try:
            n_jobs = int(os.environ.get("KMR_THREADS", "1"))
        except ValueError:
            n_jobs = 1
    if n_jobs <= 0:
        n_jobs = cores
    return max(1, min(n_jobs, cores))


def ordered_map(func, items, n_jobs: int | None = None) -> list:
    """``[func(x) for x in items]``, possibly across processes.

    Results come back in input order, so output does not depend on the
    schedule.
    """
    items = list(items)
    workers = worker_count(n_jobs)
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

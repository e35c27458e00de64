"""Thread-pool helper with schedule-independent results.

Workers write into preallocated slots keyed by task index and every task
derives its own RNG stream, so results are identical for any worker count.
The NONSTAT_THREADS environment variable caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("NONSTAT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def run_indexed(func, n_tasks: int, threads: int | None = None) -> list:
    """Evaluate ``func(i)`` for i in range(n_tasks); results in task order."""
    workers = min(thread_count(threads), max(1, n_tasks))
    results = [None] * n_tasks
    if workers <= 1:
        for i in range(n_tasks):
            results[i] = func(i)
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(func, i): i for i in range(n_tasks)}
        for fut, i in futures.items():
            results[i] = fut.result()
    return results

"""Deterministic worker-pool mapping.

Tasks must be pure functions of their arguments (randomness comes in through
explicit stream keys), so the gathered results are identical for any worker
count; ``workers <= 1`` short-circuits to a plain loop.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers: int | None) -> int:
    """Map a requested worker cap onto this machine (None or 0 -> all CPUs)."""
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    return max(1, int(workers))


def pmap(fn, tasks, workers: int = 1) -> list:
    """Apply ``fn`` to each task, preserving input order in the result list."""
    tasks = list(tasks)
    workers = resolve_workers(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

"""Ordered fan-out over independent jobs, capped by HYPEREM_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "HYPEREM_THREADS"


def worker_count(n_jobs: int) -> int:
    cap = os.cpu_count() or 1
    env = os.environ.get(ENV_VAR)
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {env!r}") from None
    return max(1, min(cap, n_jobs))


def map_ordered(fn, items) -> list:
    """fn over items; results come back in input order whatever the scheduling."""
    items = list(items)
    workers = worker_count(len(items))
    if workers == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

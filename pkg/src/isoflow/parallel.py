"""Process-pool map capped by the ISOFLOW_THREADS environment variable."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ISOFLOW_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    """Ordered map; runs in-process unless more than one worker is allowed."""
    items = list(items)
    w = min(worker_count(), len(items))
    if w <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * w))))

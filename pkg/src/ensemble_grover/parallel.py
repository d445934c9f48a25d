"""Worker-count resolution shared by sweeps and simulations."""

from __future__ import annotations

import os

THREADS_ENV = "ENSEMBLE_GROVER_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else ``$ENSEMBLE_GROVER_THREADS`` (0 = all cores), else 1."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        workers = int(raw) if raw else 1
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers

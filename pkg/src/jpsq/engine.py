"""Deterministic parallel map over sweep points.

Results come back in input order regardless of worker count, and an
exception raised by one point is captured in its :class:`PointOutcome`
instead of aborting the others.
"""

from __future__ import annotations

import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

WORKERS_ENV = "JPSQ_WORKERS"


@dataclass(frozen=True)
class PointOutcome:
    index: int
    value: Any = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV}={raw!r} is not an integer") from exc
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1")
    return n


def _run_one(task: Callable, index: int, point) -> PointOutcome:
    try:
        return PointOutcome(index, task(point))
    except Exception as exc:  # isolate per-point failures
        msg = f"{type(exc).__name__}: {exc}"
        tb = traceback.format_exc(limit=3)
        return PointOutcome(index, None, msg + "\n" + tb)


def sweep_engine(points: Sequence, task: Callable, workers: int | None = None) -> list[PointOutcome]:
    """Apply ``task`` to every point; ``task`` must be picklable when ``workers > 1``."""
    points = list(points)
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    if workers == 1 or len(points) <= 1:
        return [_run_one(task, i, p) for i, p in enumerate(points)]
    with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
        futs = [pool.submit(_run_one, task, i, p) for i, p in enumerate(points)]
        return [f.result() for f in futs]


def failures(outcomes: Sequence[PointOutcome]) -> dict[int, str]:
    """Aggregated failure report: point index → error message."""
    return {o.index: o.error for o in outcomes if not o.ok}

"""Process-pool plumbing for threshold sweeps.

Workers receive ``(common, tau_chunk)`` where ``common`` is the
policy-specific payload shared by every threshold, and return a list of
``(tau, result)`` pairs. Results are merged into one dict, so callers
get the same mapping regardless of the worker count or chunking.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence


def chunk_taus(taus: Sequence[float], jobs: int) -> list[tuple[float, ...]]:
    """Split the grid into at most ``jobs`` contiguous chunks."""
    jobs = max(1, min(jobs, len(taus)))
    size = (len(taus) + jobs - 1) // jobs
    return [tuple(taus[i : i + size]) for i in range(0, len(taus), size)]


def map_tau_chunks(
    worker: Callable[[tuple[Any, tuple[float, ...]]], list[tuple[float, Any]]],
    common: Any,
    taus: Sequence[float],
    jobs: int,
) -> dict[float, Any]:
    """Run ``worker`` over the grid, in-process or across a pool."""
    if jobs <= 1 or len(taus) <= 1:
        return dict(worker((common, tuple(taus))))
    chunks = chunk_taus(taus, jobs)
    results: dict[float, Any] = {}
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for batch in pool.map(worker, [(common, c) for c in chunks]):
            results.update(batch)
    return results

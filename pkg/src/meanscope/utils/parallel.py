"""Chunked map over worker threads."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def map_chunks(work: Callable[[int, int], T], counts: Sequence[int], threads: int = 1) -> List[T]:
    """
    Run ``work(index, count)`` for every chunk and return results in chunk order.

    Args:
        work: Function of (chunk index, chunk size)
        counts: Chunk sizes
        threads: Worker cap; 1 runs inline

    Returns:
        One result per chunk, ordered by chunk index
    """
    workers = max(1, min(threads, len(counts)))
    if workers == 1:
        return [work(i, n) for i, n in enumerate(counts)]
    logger.debug("Dispatching %d chunks to %d threads", len(counts), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, range(len(counts)), counts))

"""Utility functions for meanscope."""

from meanscope.utils.numeric import compensated_sum
from meanscope.utils.parallel import map_chunks
from meanscope.utils.sampling import chunk_counts, log_grid, log_uniform, multiscale, stream

__all__ = [
    "chunk_counts",
    "compensated_sum",
    "log_grid",
    "log_uniform",
    "map_chunks",
    "multiscale",
    "stream",
]

"""Counter-based random streams and sampling grids."""

import hashlib

import numpy as np


def stream_key(name: str) -> int:
    """Stable 64-bit key for a stream name (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, name: str, index: int = 0) -> np.random.Generator:
    """
    Random generator for one chunk of one named stream.

    The generator depends only on (seed, name, index), so chunks can be drawn
    in any order or on any worker and still produce the same numbers.

    Args:
        seed: 64-bit user seed
        name: Stream name, usually a checker id
        index: Chunk index inside the stream

    Returns:
        Philox-backed numpy Generator
    """
    entropy = [seed & 0xFFFFFFFF, seed >> 32, stream_key(name), index]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size) -> np.ndarray:
    """Draws whose logarithm is uniform on [ln lo, ln hi]."""
    draws = np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))
    return np.clip(draws, lo, hi)


def multiscale(rng: np.random.Generator, lo: float, hi: float, size) -> np.ndarray:
    """
    Log-uniform rows, about half of them confined below a random row scale.

    A confined row is log-uniform on [lo, s] with s log-uniform on [lo, hi],
    so whole rows land near the bottom of the window as often as at any other
    scale.

    Args:
        rng: Stream to draw from
        lo: Lower end of the range
        hi: Upper end of the range
        size: (rows, width)
    """
    count, width = size
    free = log_uniform(rng, lo, hi, (count, width))
    scales = log_uniform(rng, lo, hi, (count, 1))
    u = rng.uniform(0.0, 1.0, size=(count, width))
    confined = lo * np.power(scales / lo, u)
    pick = rng.uniform(0.0, 1.0, size=(count, 1)) < 0.5
    return np.clip(np.where(pick, confined, free), lo, hi)


def log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """Log-spaced grid with both ends exact."""
    grid = np.geomspace(lo, hi, points)
    grid[0], grid[-1] = lo, hi
    return grid


def chunk_counts(total: int, chunk_size: int) -> list:
    """Sizes of the fixed chunks covering ``total`` samples."""
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])

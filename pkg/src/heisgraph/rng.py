"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox substream keyed
by ``(seed, path)`` where ``path`` is a sequence of small integers naming the
consumer (task id, restart index, chunk index, ...).  Streams for distinct
paths are independent, and a stream's output depends only on ``(seed, path)``
-- never on execution order -- so sampling can be chunked or parallelised
with a deterministic merge.
"""

from __future__ import annotations

import numpy as np

_MIX = 0x9E3779B97F4A7C15  # 64-bit golden-ratio increment


def _mix64(h: int, value: int) -> int:
    h = (h ^ (value & 0xFFFFFFFFFFFFFFFF)) & 0xFFFFFFFFFFFFFFFF
    h = (h * _MIX) & 0xFFFFFFFFFFFFFFFF
    h ^= h >> 29
    return h


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the Philox generator for ``(seed, path)``."""
    key = seed & 0xFFFFFFFFFFFFFFFF
    h = _MIX
    for part in path:
        h = _mix64(h, part)
    return np.random.Generator(np.random.Philox(key=[key, h]))


def uniform_box(
    seed: int, path: tuple[int, ...], count: int, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """Sample ``count`` points uniformly in the axis box [lo, hi].

    Sampling is chunked (64k points per chunk) with one substream per chunk,
    so the result is independent of how callers split the work.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.shape[0]
    out = np.empty((count, dim))
    chunk = 1 << 16
    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        g = substream(seed, *path, start // chunk)
        out[start:stop] = lo + (hi - lo) * g.random((stop - start, dim))
    return out

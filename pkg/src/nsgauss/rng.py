"""Seeded substreams and chunked Monte-Carlo accumulation.

Every random draw in the package comes from a Philox generator keyed by
``(seed, chunk_index)``.  Work is split into fixed-size chunks whose layout
depends only on the sample count, so results are bit-identical whatever the
number of worker threads (``NSGAUSS_THREADS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

CHUNK = 1 << 16
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Estimate:
    """Monte-Carlo point estimate with its standard error."""

    value: complex | float
    stderr: float
    n: int

    def within(self, target: float, sigmas: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.value - target) <= sigmas * self.stderr + slack

    def as_dict(self) -> dict:
        v = self.value
        if isinstance(v, complex):
            v = {"re": v.real, "im": v.imag}
        return {"value": v, "stderr": self.stderr, "n": self.n}


def thread_count() -> int:
    raw = os.environ.get("NSGAUSS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"NSGAUSS_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for chunk ``index`` of stream ``seed`` (both 64-bit)."""
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def parallel_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """Ordered map; the output order never depends on scheduling."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def draw_gaussian(dim: int, seed: int, index: int, size: int) -> np.ndarray:
    return substream(seed, index).standard_normal((size, dim))


def mc_mean(
    integrand: Callable[[np.random.Generator, int], np.ndarray],
    n: int,
    seed: int,
    threads: int | None = None,
) -> Estimate:
    """Mean of ``integrand(rng, size)`` over ``n`` draws in seeded chunks.

    ``integrand`` receives the chunk generator and chunk size and returns one
    (real or complex) value per draw.  Chunk partial sums are combined in
    chunk order.
    """
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    sizes = chunk_sizes(n)

    def run(item):
        idx, size = item
        vals = np.asarray(integrand(substream(seed, idx), size))
        if vals.shape != (size,):
            raise ValueError(f"integrand returned shape {vals.shape}, expected ({size},)")
        return vals.sum(), (np.abs(vals) ** 2).sum()

    parts = parallel_map(run, list(enumerate(sizes)), threads)
    total = parts[0][0] * 0
    sq = 0.0
    for s, q in parts:
        total = total + s
        sq = sq + q
    mean = total / n
    var = max(float(sq / n - abs(mean) ** 2), 0.0) * n / (n - 1)
    value = complex(mean) if np.iscomplexobj(mean) else float(mean)
    return Estimate(value, float(np.sqrt(var / n)), n)


def gaussian_mc_mean(
    f: Callable[[np.ndarray], np.ndarray], dim: int, n: int, seed: int, threads: int | None = None
) -> Estimate:
    """Mean of ``f`` over ``n`` standard Gaussian vectors in ``R^dim``."""
    return mc_mean(lambda rng, size: f(rng.standard_normal((size, dim))), n, seed, threads)

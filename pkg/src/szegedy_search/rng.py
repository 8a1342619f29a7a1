"""Seeded random streams for Monte Carlo trials.

Trials are grouped into fixed-size blocks. Block ``b`` draws from its own
PCG64 stream keyed by ``(seed, b)``, so every trial's randomness depends only
on the seed and the trial index, never on how blocks are scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 15

T = TypeVar("T")


def block_stream(seed: int, block: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative (got {seed})")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def blocks(trials: int, block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, int, int]]:
    """Yield ``(block_index, first_trial, count)`` covering ``range(trials)``."""
    for b, start in enumerate(range(0, trials, block_size)):
        yield b, start, min(block_size, trials - start)


def run_blocks(
    seed: int,
    trials: int,
    fn: Callable[[np.random.Generator, int, int], T],
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> list[T]:
    """Call ``fn(rng, first_trial, count)`` per block; results in block order."""
    jobs = list(blocks(trials, block_size))

    def one(job):
        b, start, count = job
        return fn(block_stream(seed, b), start, count)

    if workers <= 1 or len(jobs) <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


def mean_and_stderr(samples: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error of integer samples, computed exactly.

    Integer sums make the result independent of summation order.
    """
    samples = np.asarray(samples, dtype=np.int64)
    m = samples.size
    if m == 0:
        raise ValueError("no samples")
    values, counts = np.unique(samples, return_counts=True)
    s1 = sum(int(v) * int(c) for v, c in zip(values, counts))
    s2 = sum(int(v) * int(v) * int(c) for v, c in zip(values, counts))
    mean = s1 / m
    if m == 1:
        return mean, 0.0
    # unbiased variance from exact integer moments
    var_num = m * s2 - s1 * s1
    var = var_num / (m * (m - 1))
    return mean, float(np.sqrt(max(var, 0.0) / m))

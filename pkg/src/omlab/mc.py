"""Seeded Monte Carlo plumbing: block RNG streams and estimate records."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

BLOCK_SIZE = 65536


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate: mean, standard error, sample count and seed."""

    mean: float
    stderr: float
    n: int
    seed: int | None

    def z(self, target: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.stderr

    def within(self, target: float, nsigma: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.mean - target) <= max(nsigma * self.stderr, floor)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n, "seed": self.seed}


def block_sizes(n: int, block: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def block_generators(seed: int, n: int, block: int = BLOCK_SIZE) -> list[tuple[np.random.Generator, int]]:
    """One independent generator per fixed-size block of draws.

    Streams depend only on (seed, block index), so results do not change with
    the worker count.
    """
    sizes = block_sizes(n, block)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(np.random.default_rng(ss), sz) for ss, sz in zip(children, sizes)]


def run_blocks(seed: int, n: int, fn: Callable[[np.random.Generator, int], np.ndarray],
               workers: int = 1, block: int = BLOCK_SIZE) -> list:
    """Apply ``fn(rng, size)`` to every block, in block order."""
    jobs = block_generators(seed, n, block)
    if workers <= 1 or len(jobs) == 1:
        return [fn(g, sz) for g, sz in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


def mean_estimate(values: np.ndarray, seed: int | None) -> MCEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return MCEstimate(float(np.mean(values)), sd / math.sqrt(n), n, seed)


def proportion_estimate(hits: int, n: int, seed: int | None) -> MCEstimate:
    p = hits / n
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / n), n, seed)

"""Deterministic Monte Carlo plumbing shared by the measure and trace code.

Every stochastic routine takes (seed, workers) and derives one RNG stream
per worker with SeedSequence.spawn, worker index = stream index.  Workers
are processed in index order and reduce by summation, so a result depends
only on (seed, workers), never on scheduling, and reports serialize to
identical bytes across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SEED = 20260823


def spawn_rngs(seed, workers):
    """One independent Generator per worker, deterministically derived."""
    if not isinstance(workers, (int, np.integer)) or workers < 1:
        raise ValueError(f"need integer workers >= 1, got {workers!r}")
    children = np.random.SeedSequence(int(seed)).spawn(int(workers))
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def split_count(total, workers):
    """Partition a sample budget across workers (first workers get the remainder)."""
    if not isinstance(total, (int, np.integer)) or total < 1:
        raise ValueError(f"need integer sample count >= 1, got {total!r}")
    base, rem = divmod(int(total), int(workers))
    return [base + (1 if i < rem else 0) for i in range(int(workers))]


@dataclass
class RunningMoments:
    """Streaming mean/variance accumulator (complex-safe: the variance is
    taken of |x|, which upper-bounds the variance of either component)."""

    n: int = 0
    s1: complex = 0.0
    s2: float = 0.0  # sum of |x|^2
    max_abs: float = 0.0

    def add(self, values):
        values = np.asarray(values)
        self.n += values.size
        with np.errstate(over="ignore"):  # heavy tails saturate to inf, reported via sem
            self.s1 += complex(np.sum(values))
            self.s2 += float(np.sum(np.abs(values) ** 2))
        if values.size:
            self.max_abs = max(self.max_abs, float(np.max(np.abs(values))))

    def merge(self, other):
        self.n += other.n
        self.s1 += other.s1
        self.s2 += other.s2
        self.max_abs = max(self.max_abs, other.max_abs)
        return self

    @property
    def mean(self):
        if self.n == 0:
            raise ValueError("no samples accumulated")
        m = self.s1 / self.n
        return m.real if m.imag == 0.0 else m

    @property
    def sem(self):
        """Standard error of the mean; inf once the second moment overflows."""
        if self.n < 2:
            return math.inf
        m = abs(self.s1 / self.n)
        mean_sq = m * m
        second = self.s2 / self.n
        if not (math.isfinite(second) and math.isfinite(mean_sq)):
            return math.inf
        var = max(second - mean_sq, 0.0) * self.n / (self.n - 1)
        return math.sqrt(var / self.n)

    @property
    def max_fraction(self):
        """Largest single |sample| over the total |sum|; near 1 flags a
        heavy-tailed estimator whose error bar cannot be trusted."""
        denom = abs(self.s1)
        if denom == 0.0:
            return 0.0
        return self.max_abs / denom

"""Multivariate hypergeometric / multinomial count distributions: pmfs, exact
covariance matrices, the finite population correction linking them, and a
sequential-draw sampler."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence, Union

import numpy as np

from .population import ClassifiedPopulation

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CountVector:
    """Per-class counts observed in n single-unit draws."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 1:
            raise ValueError("count vector must have at least one class")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)


Counts = Union[CountVector, Sequence[int]]


def _as_counts(c: Counts) -> tuple[int, ...]:
    if isinstance(c, CountVector):
        return c.counts
    counts = tuple(int(x) for x in c)
    if any(x < 0 for x in counts):
        raise ValueError("counts must be nonnegative")
    return counts


def fpc(n: int, N: int) -> float:
    """Finite population correction 1 - (n-1)/(N-1).

    The multiplier by which sampling without replacement shrinks every
    with-replacement (co)variance.  Defined as 1 for N = 1 (the single
    census draw, where the two schemes coincide).
    """
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if N == 1:
        return 1.0
    return 1.0 - (n - 1) / (N - 1)


def _log_choose(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def mvhyper_pmf(c: Counts, cp: ClassifiedPopulation) -> float:
    """Probability of the class counts under n draws without replacement.

    Computed by log-factorial accumulation; infeasible support points
    (some count exceeding its subgroup size) return 0.
    """
    counts = _as_counts(c)
    if len(counts) != cp.num_groups:
        raise ValueError("count vector length does not match number of subgroups")
    n = sum(counts)
    if n > cp.size:
        raise ValueError(f"total count {n} exceeds population size {cp.size}")
    if any(a > nk for a, nk in zip(counts, cp.subgroup_sizes)):
        return 0.0
    log_p = -_log_choose(cp.size, n)
    for a, nk in zip(counts, cp.subgroup_sizes):
        log_p += _log_choose(nk, a)
    return math.exp(log_p)


def multinomial_pmf(c: Counts, probs: Sequence[float]) -> float:
    """Probability of the class counts under n independent categorical draws."""
    counts = _as_counts(c)
    p = tuple(float(x) for x in probs)
    if len(p) != len(counts):
        raise ValueError("probability vector length does not match counts")
    if any(x < 0 for x in p):
        raise ValueError("probabilities must be nonnegative")
    if abs(math.fsum(p) - 1.0) > PROB_SUM_TOL:
        raise ValueError("probabilities must sum to 1")
    n = sum(counts)
    log_p = math.lgamma(n + 1)
    for a, pk in zip(counts, p):
        if pk == 0.0:
            if a > 0:
                return 0.0
            continue
        log_p += a * math.log(pk) - math.lgamma(a + 1)
    return math.exp(log_p)


def multinomial_cov(probs: Sequence[float], n: int) -> np.ndarray:
    """Covariance matrix of multinomial counts: n (diag(p) - p p^T)."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("probability vector must be one-dimensional and nonempty")
    if np.any(p < 0) or abs(math.fsum(p.tolist()) - 1.0) > PROB_SUM_TOL:
        raise ValueError("invalid probability vector")
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * (np.diag(p) - np.outer(p, p))


def mvhyper_cov(cp: ClassifiedPopulation, n: int) -> np.ndarray:
    """Covariance matrix of without-replacement counts: the multinomial
    covariance at proportions N_k/N, scaled entrywise by fpc(n, N)."""
    if not 1 <= n <= cp.size:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={cp.size}")
    return multinomial_cov(cp.proportions, n) * fpc(n, cp.size)


def sample_counts(
    cp: ClassifiedPopulation,
    n: int,
    replacement: bool,
    rng: np.random.Generator,
) -> CountVector:
    """Draw class counts by n sequential single-unit draws.

    Without replacement the remaining count of the drawn class is
    decremented after each draw, so the trajectory is literally the
    sequential sampling process.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not replacement and n > cp.size:
        raise ValueError(f"cannot draw {n} without replacement from {cp.size} units")
    k = cp.num_groups
    counts = [0] * k
    if replacement:
        cum = tuple(accumulate(cp.subgroup_sizes))
        for _ in range(n):
            r = int(rng.integers(cp.size))
            counts[bisect_right(cum, r)] += 1
    else:
        remaining = list(cp.subgroup_sizes)
        total = cp.size
        for _ in range(n):
            r = int(rng.integers(total))
            acc = 0
            for j in range(k):
                acc += remaining[j]
                if r < acc:
                    counts[j] += 1
                    remaining[j] -= 1
                    total -= 1
                    break
    return CountVector(tuple(counts))

"""Sampling designs as procedures producing draw sequences: simple random
sampling (with/without replacement), probability-proportional-to-size
sampling (with replacement, and without replacement via the extended
population), adaptive cluster sampling, and random-group splitting."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .population import NetworkPartition, Population, SizeWeights


@dataclass(frozen=True)
class DrawSequence:
    """Ordered unit indices (0-based) produced by a design.

    For the extended-population PPS design the indices address positions in
    the extended population; map them back with SizeWeights.unit_of_position.
    """

    indices: tuple[int, ...]
    replacement: bool
    design_tag: str

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if len(indices) < 1:
            raise ValueError("draw sequence must contain at least one draw")
        if any(i < 0 for i in indices):
            raise ValueError("indices must be nonnegative")
        if not self.replacement and len(set(indices)) != len(indices):
            raise ValueError("without-replacement draw sequence has repeated indices")
        object.__setattr__(self, "indices", indices)

    @property
    def n(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class GroupedSample:
    """Disjoint ordered groups of unit indices from a single WOR draw."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        if any(len(g) < 1 for g in groups):
            raise ValueError("every group must contain at least one draw")
        flat = [i for g in groups for i in g]
        if len(set(flat)) != len(flat):
            raise ValueError("groups must be disjoint")
        object.__setattr__(self, "groups", groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    @property
    def num_groups(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class AcsSample:
    """Adaptive cluster sample: initial draws plus every unit pulled in
    through the networks of the initially selected units."""

    initial: DrawSequence
    final_units: frozenset[int]


def srs(N: int, n: int, replacement: bool, rng: np.random.Generator) -> DrawSequence:
    """Simple random sampling: n sequential single-unit draws.

    Without replacement each draw is uniform among the remaining units
    (partial Fisher-Yates over a pool array), so every ordered n-tuple of
    distinct units is equally likely.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if N < 1:
        raise ValueError("N must be >= 1")
    if replacement:
        indices = tuple(int(rng.integers(N)) for _ in range(n))
        return DrawSequence(indices, True, "srs_wr")
    if n > N:
        raise ValueError(f"cannot draw {n} without replacement from {N} units")
    pool = list(range(N))
    out = []
    for _ in range(n):
        j = int(rng.integers(len(pool)))
        out.append(pool[j])
        pool[j] = pool[-1]
        pool.pop()
    return DrawSequence(tuple(out), False, "srs")


def pps_wr(w: SizeWeights, n: int, rng: np.random.Generator) -> DrawSequence:
    """PPS with replacement: each draw selects unit i with probability
    sizes[i]/total, by inverse transform on the cumulative integer weights."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cum = w.cumulative
    total = w.total
    indices = tuple(bisect_right(cum, int(rng.integers(total))) for _ in range(n))
    return DrawSequence(indices, True, "pps_wr")


def pps_wor_extended(
    pop: Population, w: SizeWeights, n: int, rng: np.random.Generator
) -> DrawSequence:
    """PPS without replacement via the extended population: simple random
    sampling WOR of n positions out of the total(w) extended positions."""
    if w.num_units != pop.size:
        raise ValueError("size weights length does not match population size")
    if n > w.total:
        raise ValueError(f"cannot draw {n} without replacement from extended size {w.total}")
    base = srs(w.total, n, replacement=False, rng=rng)
    return DrawSequence(base.indices, False, "pps_wor")


def acs(
    pop: Population,
    partition: NetworkPartition,
    n_1: int,
    replacement: bool,
    rng: np.random.Generator,
) -> AcsSample:
    """Adaptive cluster sampling: SRS initial draws, then the full network of
    every initially selected unit enters the final sample."""
    if partition.num_units != pop.size:
        raise ValueError("partition size does not match population size")
    initial = srs(pop.size, n_1, replacement, rng)
    members: dict[int, list[int]] = {}
    for i, a in enumerate(partition.assignment):
        members.setdefault(a, []).append(i)
    final: set[int] = set()
    for i in initial.indices:
        final.update(members[partition.assignment[i]])
    return AcsSample(initial, frozenset(final))


def random_group_split(seq: DrawSequence, sizes: Sequence[int]) -> GroupedSample:
    """Split an ordered WOR draw into contiguous groups of the given sizes.

    Contiguous ascription of a sequential WOR draw already carries the law
    of sampling first and then randomly grouping, so no re-randomization
    is performed.
    """
    if seq.replacement:
        raise ValueError("random group split requires a without-replacement draw")
    sizes = tuple(int(s) for s in sizes)
    if any(s < 1 for s in sizes):
        raise ValueError("every group size must be >= 1")
    if sum(sizes) != seq.n:
        raise ValueError(f"group sizes sum to {sum(sizes)}, sequence has {seq.n} draws")
    groups = []
    start = 0
    for s in sizes:
        groups.append(seq.indices[start : start + s])
        start += s
    return GroupedSample(tuple(groups))

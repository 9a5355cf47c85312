"""Point estimators and their closed-form design variances, including the
random-group estimator of the population variance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .designs import AcsSample, DrawSequence, GroupedSample
from .distributions import fpc
from .population import NetworkPartition, Population, SizeWeights


@dataclass(frozen=True)
class EstimateReport:
    """A point estimate together with its theoretical design variance."""

    point: float
    theoretical_variance: Optional[float]
    design_tag: str
    estimand: str  # "mean" | "total" | "population_variance"

    def __post_init__(self) -> None:
        if self.theoretical_variance is not None and self.theoretical_variance < -0.0:
            raise ValueError("theoretical variance must be nonnegative")


def sample_mean(pop: Population, seq: DrawSequence) -> float:
    """Arithmetic mean of the population values at the drawn indices."""
    for i in seq.indices:
        if i >= pop.size:
            raise ValueError(f"index {i} out of range for population of size {pop.size}")
    return math.fsum(pop.values[i] for i in seq.indices) / seq.n


def srs_mean_variance(pop: Population, n: int, replacement: bool) -> float:
    """Design variance of the SRS sample mean: sigma^2/n, times fpc(n, N)
    when sampling without replacement."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not replacement and n > pop.size:
        raise ValueError(f"cannot draw {n} without replacement from {pop.size} units")
    v = pop.variance / n
    return v if replacement else v * fpc(n, pop.size)


def _ratios(pop: Population, w: SizeWeights) -> tuple[float, ...]:
    if w.num_units != pop.size:
        raise ValueError("size weights length does not match population size")
    return tuple(y / z for y, z in zip(pop.values, w.probabilities))


def hansen_hurvitz(pop: Population, w: SizeWeights, seq: DrawSequence) -> float:
    """Hansen-Hurvitz estimator of the population total: mean of Y_i/Z_i over
    the draws.  Accepts both native PPS draws (unit indices) and
    extended-population draws (positions, mapped back to units)."""
    ratios = _ratios(pop, w)
    if seq.design_tag == "pps_wor":
        units = [w.unit_of_position(p) for p in seq.indices]
    else:
        for i in seq.indices:
            if i >= pop.size:
                raise ValueError(f"index {i} out of range for population of size {pop.size}")
        units = list(seq.indices)
    return math.fsum(ratios[i] for i in units) / seq.n


def hh_variance(pop: Population, w: SizeWeights, n: int, replacement: bool) -> float:
    """Variance of the Hansen-Hurvitz total estimator:
    (1/n) sum_i Z_i (Y_i/Z_i - t_Y)^2, times fpc(n, t_M) for the
    extended-population WOR variant."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not replacement and n > w.total:
        raise ValueError(f"cannot draw {n} without replacement from extended size {w.total}")
    ratios = _ratios(pop, w)
    t_y = pop.total
    v = math.fsum(z * (r - t_y) ** 2 for z, r in zip(w.probabilities, ratios)) / n
    return v if replacement else v * fpc(n, w.total)


def acs_mean(pop: Population, partition: NetworkPartition, s: AcsSample) -> float:
    """ACS estimator of the population mean: average, over the initial draws,
    of the network mean of each initially selected unit."""
    if partition.num_units != pop.size:
        raise ValueError("partition size does not match population size")
    for i in s.initial.indices:
        if i >= pop.size:
            raise ValueError(f"index {i} out of range for population of size {pop.size}")
    means = partition.network_means
    return math.fsum(means[partition.assignment[i]] for i in s.initial.indices) / s.initial.n


def acs_variance(
    pop: Population, partition: NetworkPartition, n_1: int, replacement: bool
) -> float:
    """Variance of the ACS mean estimator: the flattened-population variance
    (1/N) sum_k N_k (mean_k - mean)^2 over n_1, times fpc(n_1, N) for a
    without-replacement initial sample."""
    if partition.num_units != pop.size:
        raise ValueError("partition size does not match population size")
    if n_1 < 1:
        raise ValueError("n_1 must be >= 1")
    if not replacement and n_1 > pop.size:
        raise ValueError(f"cannot draw {n_1} without replacement from {pop.size} units")
    mean = pop.mean
    flat_var = (
        math.fsum(
            nk * (mk - mean) ** 2
            for nk, mk in zip(partition.network_sizes, partition.network_means)
        )
        / pop.size
    )
    v = flat_var / n_1
    return v if replacement else v * fpc(n_1, pop.size)


def _group_means(pop: Population, g: GroupedSample) -> list[float]:
    for grp in g.groups:
        for i in grp:
            if i >= pop.size:
                raise ValueError(f"index {i} out of range for population of size {pop.size}")
    return [math.fsum(pop.values[i] for i in grp) / len(grp) for grp in g.groups]


def random_group_variance_estimate(pop: Population, g: GroupedSample) -> float:
    """Unbiased estimator of the population variance S^2 (denominator N-1)
    from a grouped WOR sample: average over group pairs (k, l) of
    (mean_k - mean_l)^2 / (1/n_k + 1/n_l)."""
    if g.num_groups < 2:
        raise ValueError("need at least two groups")
    means = _group_means(pop, g)
    sizes = g.sizes
    terms = []
    for k in range(g.num_groups):
        for l in range(k + 1, g.num_groups):
            terms.append((means[k] - means[l]) ** 2 / (1.0 / sizes[k] + 1.0 / sizes[l]))
    return math.fsum(terms) / len(terms)


def random_group_variance_equal_sizes(pop: Population, g: GroupedSample) -> float:
    """Equal-group-size shortcut: m times the sample variance (denominator
    K-1) of the K group means.  Algebraically equal to the pairwise form."""
    if g.num_groups < 2:
        raise ValueError("need at least two groups")
    sizes = set(g.sizes)
    if len(sizes) != 1:
        raise ValueError("shortcut requires equal group sizes")
    m = g.sizes[0]
    means = _group_means(pop, g)
    k = len(means)
    grand = math.fsum(means) / k
    return m * math.fsum((x - grand) ** 2 for x in means) / (k - 1)


def rg_pair_expectation(pop: Population, n_k: int, n_l: int) -> float:
    """Closed-form expectation of (mean_k - mean_l)^2 for two random groups of
    sizes n_k and n_l drawn WOR from the population: S^2 (1/n_k + 1/n_l)."""
    if n_k < 1 or n_l < 1:
        raise ValueError("group sizes must be >= 1")
    if n_k + n_l > pop.size:
        raise ValueError("group sizes exceed population size")
    return pop.s_squared * (1.0 / n_k + 1.0 / n_l)

"""Two independent verification engines for the closed-form results: an
exhaustive enumeration oracle (exact moments on small instances) and a
seeded, block-deterministic Monte Carlo harness, plus report records
comparing both against the theoretical values."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import estimators
from .population import (
    Adjacency,
    ClassifiedPopulation,
    NetworkPartition,
    Population,
    SizeWeights,
    compute_networks,
    extend_pps,
    flatten_networks,
)
from .distributions import fpc

ENUMERATION_LIMIT = 10_000_000
NUM_BLOCKS = 100

DESIGN_NAMES = ("srs", "srs_wr", "pps_wr", "pps_wor", "acs", "acs_wr")


class EnumerationLimitError(RuntimeError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Tolerances:
    """Comparison tolerances; abs/rel for oracle checks, SE multiplier for
    Monte Carlo bands."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    se_multiplier: float = 4.0

    def close(self, observed: float, expected: float) -> bool:
        return abs(observed - expected) <= max(self.abs_tol, self.rel_tol * abs(expected))

    def to_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "se_multiplier": self.se_multiplier,
        }


@dataclass(frozen=True)
class DesignConfig:
    """Which design to run and at what sizes.  group_sizes switches an SRS
    WOR draw to the random-group population-variance estimator."""

    design: str
    n: Optional[int] = None
    n1: Optional[int] = None
    group_sizes: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.design not in DESIGN_NAMES:
            raise ValueError(f"unknown design {self.design!r}; expected one of {DESIGN_NAMES}")
        if self.group_sizes is not None:
            sizes = tuple(int(s) for s in self.group_sizes)
            if len(sizes) < 2 or any(s < 1 for s in sizes):
                raise ValueError("group_sizes must be >= 2 positive integers")
            object.__setattr__(self, "group_sizes", sizes)

    @classmethod
    def from_mapping(cls, m: Mapping) -> "DesignConfig":
        extra = set(m) - {"design", "n", "n1", "group_sizes"}
        if extra:
            raise ValueError(f"unknown design config keys: {sorted(extra)}")
        if "design" not in m:
            raise ValueError("design config requires a 'design' key")
        gs = m.get("group_sizes")
        return cls(
            design=str(m["design"]),
            n=None if m.get("n") is None else int(m["n"]),
            n1=None if m.get("n1") is None else int(m["n1"]),
            group_sizes=None if gs is None else tuple(int(s) for s in gs),
        )


@dataclass(frozen=True)
class Instance:
    """A population plus whatever auxiliary structure the designs need."""

    population: Optional[Population] = None
    weights: Optional[SizeWeights] = None
    partition: Optional[NetworkPartition] = None
    classified: Optional[ClassifiedPopulation] = None

    @classmethod
    def from_mapping(cls, m: Mapping) -> "Instance":
        pop = Population(tuple(m["values"])) if "values" in m else None
        weights = SizeWeights(tuple(m["sizes"])) if m.get("sizes") is not None else None
        classified = (
            ClassifiedPopulation(tuple(m["subgroup_sizes"]))
            if m.get("subgroup_sizes") is not None
            else None
        )
        partition = None
        if m.get("adjacency") is not None:
            if pop is None:
                raise ValueError("adjacency requires population values")
            if m.get("threshold") is None:
                raise ValueError("adjacency requires a threshold")
            adj = Adjacency(tuple(tuple(row) for row in m["adjacency"]))
            partition = compute_networks(pop, adj, float(m["threshold"]))
        return cls(pop, weights, partition, classified)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: Optional[float]


@dataclass(frozen=True)
class EstimatorSpec:
    """Everything the oracle and the Monte Carlo harness need to realize a
    (design, estimator) pair: the index universe sampled from, per-index
    values, optional integer draw weights, and the closed-form moments."""

    tag: str
    estimand: str
    universe: int
    n: int
    replacement: bool
    values: tuple[float, ...]
    weight_sizes: Optional[tuple[int, ...]]
    group_sizes: Optional[tuple[int, ...]]
    theoretical: Moments


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def estimator_spec(inst: Instance, config: DesignConfig) -> EstimatorSpec:
    """Resolve a design config against an instance."""
    design = config.design
    pop = inst.population
    _require(pop is not None, f"design {design!r} requires population values")

    if design in ("srs", "srs_wr") and config.group_sizes is None:
        _require(config.n is not None and config.n >= 1, "srs requires n >= 1")
        n = config.n
        replacement = design == "srs_wr"
        _require(replacement or n <= pop.size, f"n={n} exceeds N={pop.size} for WOR")
        return EstimatorSpec(
            "sample_mean", "mean", pop.size, n, replacement, pop.values, None, None,
            Moments(pop.mean, estimators.srs_mean_variance(pop, n, replacement)),
        )

    if design == "srs" and config.group_sizes is not None:
        sizes = config.group_sizes
        n = sum(sizes)
        _require(config.n is None or config.n == n, "n must equal sum(group_sizes)")
        _require(n <= pop.size, f"group sizes sum {n} exceeds N={pop.size}")
        _require(pop.size >= 2, "population variance needs N >= 2")
        return EstimatorSpec(
            "rg_variance", "population_variance", pop.size, n, False, pop.values,
            None, sizes, Moments(pop.s_squared, None),
        )

    if design in ("pps_wr", "pps_wor"):
        w = inst.weights
        _require(w is not None, f"design {design!r} requires size weights")
        _require(config.n is not None and config.n >= 1, "pps requires n >= 1")
        n = config.n
        if design == "pps_wr":
            ratios = tuple(y / z for y, z in zip(pop.values, w.probabilities))
            return EstimatorSpec(
                "hh_total", "total", pop.size, n, True, ratios, w.sizes, None,
                Moments(pop.total, estimators.hh_variance(pop, w, n, replacement=True)),
            )
        _require(n <= w.total, f"n={n} exceeds extended size {w.total} for WOR")
        extended = extend_pps(pop, w)
        return EstimatorSpec(
            "hh_total", "total", w.total, n, False, extended.values, None, None,
            Moments(pop.total, estimators.hh_variance(pop, w, n, replacement=False)),
        )

    if design in ("acs", "acs_wr"):
        partition = inst.partition
        _require(partition is not None, f"design {design!r} requires a network partition")
        n_1 = config.n1 if config.n1 is not None else config.n
        _require(n_1 is not None and n_1 >= 1, "acs requires n1 >= 1")
        replacement = design == "acs_wr"
        _require(replacement or n_1 <= pop.size, f"n1={n_1} exceeds N={pop.size} for WOR")
        flat = flatten_networks(pop, partition)
        return EstimatorSpec(
            "acs_mean", "mean", pop.size, n_1, replacement, flat.values, None, None,
            Moments(pop.mean, estimators.acs_variance(pop, partition, n_1, replacement)),
        )

    raise ValueError(f"unsupported design {design!r}")


def _rg_estimate(values: Sequence[float], sizes: Sequence[int]) -> float:
    means = []
    start = 0
    for s in sizes:
        means.append(math.fsum(values[start : start + s]) / s)
        start += s
    terms = []
    for k in range(len(sizes)):
        for l in range(k + 1, len(sizes)):
            terms.append((means[k] - means[l]) ** 2 / (1.0 / sizes[k] + 1.0 / sizes[l]))
    return math.fsum(terms) / len(terms)


def _outcome_value(spec: EstimatorSpec, outcome: tuple[int, ...]) -> float:
    drawn = [spec.values[i] for i in outcome]
    if spec.group_sizes is not None:
        return _rg_estimate(drawn, spec.group_sizes)
    return math.fsum(drawn) / spec.n


def _check_enumeration_size(spec: EstimatorSpec) -> int:
    if spec.replacement:
        count = spec.universe ** spec.n
    else:
        count = math.perm(spec.universe, spec.n)
    if count > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"{count} ordered outcomes exceed the enumeration limit {ENUMERATION_LIMIT}"
        )
    return count


def _outcomes(spec: EstimatorSpec) -> Iterable[tuple[int, ...]]:
    if spec.replacement:
        return itertools.product(range(spec.universe), repeat=spec.n)
    return itertools.permutations(range(spec.universe), spec.n)


def enumerate_moments(inst: Instance, config: DesignConfig) -> Moments:
    """Exact mean and variance of the estimator by summation over every
    ordered outcome of the design (weight-exact for PPS with replacement)."""
    spec = estimator_spec(inst, config)
    count = _check_enumeration_size(spec)
    if spec.weight_sizes is None:
        mean = math.fsum(_outcome_value(spec, o) for o in _outcomes(spec)) / count
        var = math.fsum((_outcome_value(spec, o) - mean) ** 2 for o in _outcomes(spec)) / count
        return Moments(mean, var)
    total = sum(spec.weight_sizes)
    probs = [s / total for s in spec.weight_sizes]

    def weight(outcome: tuple[int, ...]) -> float:
        w = 1.0
        for i in outcome:
            w *= probs[i]
        return w

    mean = math.fsum(weight(o) * _outcome_value(spec, o) for o in _outcomes(spec))
    var = math.fsum(weight(o) * (_outcome_value(spec, o) - mean) ** 2 for o in _outcomes(spec))
    return Moments(mean, var)


def theoretical_moments(inst: Instance, config: DesignConfig) -> Moments:
    """Closed-form mean and variance of the estimator under the design."""
    return estimator_spec(inst, config).theoretical


# ---------------------------------------------------------------------------
# Count distributions (sequential-draw probability chain, aggregated by the
# count vector; exact and independent of the closed-form pmfs).

def count_distributions_upto(
    cp: ClassifiedPopulation, n: int, replacement: bool
) -> list[dict[tuple[int, ...], float]]:
    """Count-vector distribution after t = 1..n sequential draws.

    Evolves the probability of each count state one draw at a time with the
    per-draw class probabilities, so the result follows the ordered sampling
    process directly rather than any closed-form pmf.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not replacement and n > cp.size:
        raise ValueError(f"cannot draw {n} without replacement from {cp.size} units")
    k = cp.num_groups
    big_n = cp.size
    sizes = cp.subgroup_sizes
    dist: dict[tuple[int, ...], float] = {(0,) * k: 1.0}
    out = []
    for t in range(n):
        new: dict[tuple[int, ...], float] = {}
        remaining_total = big_n if replacement else big_n - t
        for state, p in dist.items():
            for j in range(k):
                avail = sizes[j] if replacement else sizes[j] - state[j]
                if avail <= 0:
                    continue
                q = p * (avail / remaining_total)
                ns = state[:j] + (state[j] + 1,) + state[j + 1 :]
                new[ns] = new.get(ns, 0.0) + q
        if len(new) > ENUMERATION_LIMIT:
            raise EnumerationLimitError(
                f"count support exceeds the enumeration limit {ENUMERATION_LIMIT}"
            )
        dist = new
        out.append(dist)
    return out


def enumerate_count_distribution(
    cp: ClassifiedPopulation, n: int, replacement: bool
) -> dict[tuple[int, ...], float]:
    """Exact distribution of the class counts after n sequential draws."""
    return count_distributions_upto(cp, n, replacement)[-1]


def count_moments(dist: Mapping[tuple[int, ...], float]) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of a count distribution."""
    states = np.array(list(dist.keys()), dtype=float)
    probs = np.array(list(dist.values()), dtype=float)
    mean = probs @ states
    cov = states.T @ (states * probs[:, None]) - np.outer(mean, mean)
    return mean, cov


# ---------------------------------------------------------------------------
# Monte Carlo harness.

def _block_values(spec: EstimatorSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    values = np.asarray(spec.values, dtype=float)
    if spec.weight_sizes is not None:
        cum = np.cumsum(spec.weight_sizes)
        r = rng.integers(0, int(cum[-1]), size=(size, spec.n))
        idx = np.searchsorted(cum, r, side="right")
    elif spec.replacement:
        idx = rng.integers(0, spec.universe, size=(size, spec.n))
    else:
        keys = rng.random((size, spec.universe))
        idx = np.argsort(keys, axis=1)[:, : spec.n]
    drawn = values[idx]
    if spec.group_sizes is None:
        return drawn.mean(axis=1)
    sizes = np.asarray(spec.group_sizes)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    group_means = np.add.reduceat(drawn, starts, axis=1) / sizes
    k = len(sizes)
    acc = np.zeros(size)
    pairs = 0
    for a in range(k):
        for b in range(a + 1, k):
            acc += (group_means[:, a] - group_means[:, b]) ** 2 / (
                1.0 / sizes[a] + 1.0 / sizes[b]
            )
            pairs += 1
    return acc / pairs


def _merge_moments(
    a: tuple[int, float, float], b: tuple[int, float, float]
) -> tuple[int, float, float]:
    # Chan et al. pairwise update; merged in fixed block order for determinism.
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * nb / n
    m2 = m2a + m2b + delta * delta * na * nb / n
    return n, mean, m2


def _block_sizes(trials: int) -> list[int]:
    blocks = min(NUM_BLOCKS, trials)
    base, rem = divmod(trials, blocks)
    return [base + 1 if b < rem else base for b in range(blocks)]


def simulate_blocks(
    inst: Instance, config: DesignConfig, trials: int, seed: int
) -> list[tuple[int, float, float]]:
    """Per-block (count, mean, sum of squared deviations) accumulators.

    Block b draws from a stream derived deterministically from (seed, b), so
    any execution order or worker count reproduces the same accumulators.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = estimator_spec(inst, config)
    out = []
    for b, size in enumerate(_block_sizes(trials)):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(b,)))
        v = _block_values(spec, rng, size)
        m = float(v.mean())
        m2 = float(((v - m) ** 2).sum())
        out.append((size, m, m2))
    return out


@dataclass(frozen=True)
class MomentReport:
    """Theoretical vs. enumerated vs. Monte Carlo moments with verdicts."""

    estimator_tag: str
    estimand: str
    design: str
    theoretical: dict
    enumerated: Optional[dict]
    empirical: dict
    normalizations: Optional[dict]
    tolerances: dict
    checks: dict
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "estimator_tag": self.estimator_tag,
            "estimand": self.estimand,
            "design": self.design,
            "theoretical": self.theoretical,
            "enumerated": self.enumerated,
            "empirical": self.empirical,
            "normalizations": self.normalizations,
            "tolerances": self.tolerances,
            "checks": self.checks,
            "verdict": self.verdict,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def run_monte_carlo(
    inst: Instance,
    config: DesignConfig,
    trials: int,
    seed: int,
    tolerances: Tolerances = Tolerances(),
) -> MomentReport:
    """Seeded Monte Carlo check of an estimator's moments.

    Empirical mean and variance must land within se_multiplier standard
    errors of the theoretical values; when the instance is small enough the
    enumeration oracle is run as well and compared at the oracle tolerance.
    """
    spec = estimator_spec(inst, config)
    blocks = simulate_blocks(inst, config, trials, seed)
    count, mean, m2 = blocks[0]
    for blk in blocks[1:]:
        count, mean, m2 = _merge_moments((count, mean, m2), blk)
    variance = m2 / (count - 1) if count > 1 else 0.0
    se_mean = math.sqrt(variance / count) if count > 1 else None
    block_vars = [b_m2 / (b_n - 1) for b_n, _, b_m2 in blocks if b_n > 1]
    if len(block_vars) > 1:
        bv_mean = math.fsum(block_vars) / len(block_vars)
        bv_spread = math.fsum((v - bv_mean) ** 2 for v in block_vars) / (len(block_vars) - 1)
        se_var = math.sqrt(bv_spread / len(block_vars))
    else:
        se_var = None

    try:
        enum = enumerate_moments(inst, config)
    except EnumerationLimitError:
        enum = None

    theo = spec.theoretical
    k = tolerances.se_multiplier
    checks: dict[str, Optional[bool]] = {}
    checks["empirical_mean_within_band"] = (
        abs(mean - theo.mean) <= k * se_mean if se_mean is not None else None
    )
    checks["empirical_variance_within_band"] = (
        abs(variance - theo.variance) <= k * se_var
        if (se_var is not None and theo.variance is not None)
        else None
    )
    checks["enumerated_mean_matches"] = (
        tolerances.close(enum.mean, theo.mean) if enum is not None else None
    )
    checks["enumerated_variance_matches"] = (
        tolerances.close(enum.variance, theo.variance)
        if (enum is not None and theo.variance is not None)
        else None
    )
    verdict = all(v for v in checks.values() if v is not None)

    point = mean
    if spec.estimand == "mean":
        normalizations = {"mean": point, "total": point * inst.population.size}
    elif spec.estimand == "total":
        normalizations = {"total": point, "mean": point / inst.population.size}
    else:
        normalizations = None

    return MomentReport(
        estimator_tag=spec.tag,
        estimand=spec.estimand,
        design=config.design,
        theoretical={"mean": theo.mean, "variance": theo.variance},
        enumerated=None if enum is None else {"mean": enum.mean, "variance": enum.variance},
        empirical={
            "mean": mean,
            "variance": variance,
            "trials": count,
            "standard_error_mean": se_mean,
            "standard_error_variance": se_var,
        },
        normalizations=normalizations,
        tolerances=tolerances.to_dict(),
        checks=checks,
        verdict=bool(verdict),
    )


# ---------------------------------------------------------------------------
# Relative efficiency (WOR vs WR).

_PAIRS = {
    "srs": ("srs", "srs_wr"),
    "srs_wr": ("srs", "srs_wr"),
    "pps_wr": ("pps_wor", "pps_wr"),
    "pps_wor": ("pps_wor", "pps_wr"),
    "acs": ("acs", "acs_wr"),
    "acs_wr": ("acs", "acs_wr"),
}

DEGENERATE_VARIANCE = 1e-15


@dataclass(frozen=True)
class RelativeEfficiencyReport:
    """Observed WOR/WR variance ratio against the predicted correction."""

    design_pair: tuple[str, str]
    estimator_tag: str
    method: str  # "enumeration" | "monte_carlo"
    wor_variance: float
    wr_variance: float
    ratio: Optional[float]
    predicted_fpc: float
    effective_population_size: int
    sample_size: int
    tolerances: dict
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "design_pair": list(self.design_pair),
            "estimator_tag": self.estimator_tag,
            "method": self.method,
            "wor_variance": self.wor_variance,
            "wr_variance": self.wr_variance,
            "ratio": self.ratio,
            "predicted_fpc": self.predicted_fpc,
            "effective_population_size": self.effective_population_size,
            "sample_size": self.sample_size,
            "tolerances": self.tolerances,
            "verdict": self.verdict,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def relative_efficiency(
    inst: Instance,
    config: DesignConfig,
    tolerances: Tolerances = Tolerances(),
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> RelativeEfficiencyReport:
    """Compare the enumerated (preferred) or Monte Carlo WOR/WR variance
    ratio against the predicted finite population correction."""
    if config.group_sizes is not None:
        raise ValueError("random-group configs have no WR/WOR pairing")
    if config.design not in _PAIRS:
        raise ValueError(f"design {config.design!r} has no WR/WOR pairing")
    wor_name, wr_name = _PAIRS[config.design]
    wor_cfg = DesignConfig(wor_name, n=config.n, n1=config.n1)
    wr_cfg = DesignConfig(wr_name, n=config.n, n1=config.n1)
    spec_wor = estimator_spec(inst, wor_cfg)

    if wor_name == "pps_wor":
        eff_n, eff_size = spec_wor.n, inst.weights.total
    else:
        eff_n, eff_size = spec_wor.n, inst.population.size
    predicted = fpc(eff_n, eff_size)

    se_wor = se_wr = None
    try:
        var_wor = enumerate_moments(inst, wor_cfg).variance
        var_wr = enumerate_moments(inst, wr_cfg).variance
        method = "enumeration"
    except EnumerationLimitError:
        if seed is None or trials is None:
            raise
        rep_wor = run_monte_carlo(inst, wor_cfg, trials, seed, tolerances)
        rep_wr = run_monte_carlo(inst, wr_cfg, trials, seed + 1, tolerances)
        var_wor = rep_wor.empirical["variance"]
        var_wr = rep_wr.empirical["variance"]
        se_wor = rep_wor.empirical["standard_error_variance"]
        se_wr = rep_wr.empirical["standard_error_variance"]
        method = "monte_carlo"

    if var_wr <= DEGENERATE_VARIANCE:
        ratio = None
        verdict = var_wor <= DEGENERATE_VARIANCE
    else:
        ratio = var_wor / var_wr
        if method == "enumeration":
            verdict = tolerances.close(ratio, predicted)
        else:
            se_ratio = abs(ratio) * math.sqrt(
                (se_wor / var_wor) ** 2 + (se_wr / var_wr) ** 2
            )
            verdict = abs(ratio - predicted) <= tolerances.se_multiplier * se_ratio

    return RelativeEfficiencyReport(
        design_pair=(wor_name, wr_name),
        estimator_tag=spec_wor.tag,
        method=method,
        wor_variance=var_wor,
        wr_variance=var_wr,
        ratio=ratio,
        predicted_fpc=predicted,
        effective_population_size=eff_size,
        sample_size=eff_n,
        tolerances=tolerances.to_dict(),
        verdict=bool(verdict),
    )

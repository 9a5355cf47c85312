import itertools
import math
from collections import Counter

import numpy as np
import pytest

from finpop import (
    NetworkPartition,
    Population,
    SizeWeights,
    acs,
    pps_wor_extended,
    pps_wr,
    random_group_split,
    srs,
)
from finpop.designs import DrawSequence, GroupedSample


class ScriptedRng:
    """Deterministic stand-in feeding a fixed script of choices, used to
    enumerate every reachable sampler output."""

    def __init__(self, script):
        self.script = list(script)
        self.pos = 0

    def integers(self, low, high=None):
        if high is None:
            low, high = 0, low
        v = self.script[self.pos]
        self.pos += 1
        assert low <= v < high
        return v


class TestDrawSequence:
    def test_wor_rejects_duplicates(self):
        with pytest.raises(ValueError):
            DrawSequence((1, 1), False, "srs")

    def test_wr_allows_duplicates(self):
        seq = DrawSequence((1, 1), True, "srs_wr")
        assert seq.n == 2

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            DrawSequence((), False, "srs")


class TestSrs:
    def test_census_is_permutation(self, rng):
        for _ in range(10):
            seq = srs(5, 5, False, rng)
            assert sorted(seq.indices) == list(range(5))

    def test_wor_size_check(self, rng):
        with pytest.raises(ValueError):
            srs(3, 4, False, rng)

    def test_single_draw_uniform(self, rng):
        trials = 30_000
        hits = Counter(srs(4, 1, False, rng).indices[0] for _ in range(trials))
        se = math.sqrt(0.25 * 0.75 / trials)
        for i in range(4):
            assert abs(hits[i] / trials - 0.25) <= 4 * se

    def test_wor_reachable_outputs_exactly_uniform(self):
        # Drive the sampler with every possible choice script; each ordered
        # pair must be produced exactly once.
        N, n = 4, 2
        outputs = Counter()
        for script in itertools.product(range(4), range(3)):
            seq = srs(N, n, False, ScriptedRng(script))
            outputs[seq.indices] = outputs.get(seq.indices, 0) + 1
        assert len(outputs) == 12
        assert set(outputs.values()) == {1}

    def test_wor_ordered_pairs_chi_square(self, rng):
        # Chi-square over all 20 ordered pairs, alpha = 0.001.
        N, n, trials = 5, 2, 200_000
        hits = Counter(srs(N, n, False, rng).indices for _ in range(trials))
        expected = trials / 20
        chi2 = sum((hits[pair] - expected) ** 2 / expected
                   for pair in itertools.permutations(range(N), n))
        assert chi2 < 43.82  # chi2.ppf(0.999, df=19)


class TestPpsWr:
    def test_single_unit(self, rng):
        seq = pps_wr(SizeWeights((3,)), 4, rng)
        assert seq.indices == (0, 0, 0, 0)

    def test_uniform_weights_frequencies(self, rng):
        trials = 60_000
        seq = pps_wr(SizeWeights((1, 1, 1)), trials, rng)
        hits = Counter(seq.indices)
        se = math.sqrt((1 / 3) * (2 / 3) / trials)
        for i in range(3):
            assert abs(hits[i] / trials - 1 / 3) <= 4 * se

    def test_weighted_frequencies(self, rng):
        trials = 120_000
        seq = pps_wr(SizeWeights((1, 2, 3)), trials, rng)
        hits = Counter(seq.indices)
        for i, p in enumerate((1 / 6, 2 / 6, 3 / 6)):
            se = math.sqrt(p * (1 - p) / trials)
            assert abs(hits[i] / trials - p) <= 4 * se


class TestPpsWorExtended:
    def test_unit_weights_reduce_to_srs(self):
        # With unit weights the extended population is the original one, so
        # the reachable outputs match srs WOR exactly.
        pop = Population((1, 2, 3, 4))
        w = SizeWeights((1, 1, 1, 1))
        for script in itertools.product(range(4), range(3)):
            a = pps_wor_extended(pop, w, 2, ScriptedRng(script))
            b = srs(4, 2, False, ScriptedRng(script))
            assert a.indices == b.indices

    def test_census_size_and_bounds(self, rng):
        pop = Population((2, 2, 3))
        w = SizeWeights((1, 2, 3))
        seq = pps_wor_extended(pop, w, 6, rng)
        assert sorted(seq.indices) == list(range(6))
        assert seq.design_tag == "pps_wor"

    def test_oversized_draw(self, rng):
        with pytest.raises(ValueError):
            pps_wor_extended(Population((1, 2)), SizeWeights((1, 2)), 4, rng)


class TestAcs:
    def test_singleton_networks(self, rng):
        pop = Population((1, 2, 3))
        part = NetworkPartition.from_assignment(pop, [0, 1, 2])
        s = acs(pop, part, 2, False, rng)
        assert s.final_units == frozenset(s.initial.indices)

    def test_network_expansion(self):
        pop = Population((5, 5, 0, 5))
        part = NetworkPartition.from_assignment(pop, [0, 0, 1, 2])
        s = acs(pop, part, 1, False, ScriptedRng([0]))
        assert s.initial.indices == (0,)
        assert s.final_units == frozenset({0, 1})

    def test_census_initial_covers_everything(self, rng):
        pop = Population((1, 3, 5))
        part = NetworkPartition.from_assignment(pop, [0, 0, 1])
        s = acs(pop, part, 3, False, rng)
        assert s.final_units == frozenset({0, 1, 2})

    def test_final_units_union_of_complete_networks(self, rng):
        pop = Population(tuple(range(8)))
        part = NetworkPartition.from_assignment(pop, [0, 0, 1, 1, 1, 2, 3, 3])
        for _ in range(50):
            s = acs(pop, part, 3, False, rng)
            for i in list(s.final_units):
                net = part.assignment[i]
                assert set(part.members(net)) <= s.final_units


class TestRandomGroupSplit:
    def test_single_group(self, rng):
        seq = srs(5, 3, False, rng)
        g = random_group_split(seq, (3,))
        assert g.groups == (seq.indices,)

    def test_contiguous_segmentation(self):
        seq = DrawSequence((2, 0, 3, 1), False, "srs")
        g = random_group_split(seq, (2, 2))
        assert g.groups == ((2, 0), (3, 1))

    def test_rejects_wr_input(self):
        seq = DrawSequence((0, 0), True, "srs_wr")
        with pytest.raises(ValueError):
            random_group_split(seq, (1, 1))

    def test_rejects_size_mismatch(self):
        seq = DrawSequence((0, 1, 2), False, "srs")
        with pytest.raises(ValueError):
            random_group_split(seq, (2, 2))

    def test_two_stage_grouping_law(self):
        # Over all ordered WOR draws, every unordered grouping must appear
        # with multiplicity n_1! * n_2! * ... (the two-stage law).
        N, sizes = 4, (2, 2)
        n = sum(sizes)
        counts = Counter()
        for perm in itertools.permutations(range(N), n):
            g = random_group_split(DrawSequence(perm, False, "srs"), sizes)
            key = tuple(frozenset(grp) for grp in g.groups)
            counts[key] += 1
        expected = math.prod(math.factorial(s) for s in sizes)
        assert set(counts.values()) == {expected}
        # 4!/(2!2!) = 6 ordered groupings of unordered groups
        assert len(counts) == 6

    def test_two_stage_law_partial_sample(self):
        N, sizes = 5, (1, 2)
        counts = Counter()
        for perm in itertools.permutations(range(N), 3):
            g = random_group_split(DrawSequence(perm, False, "srs"), sizes)
            counts[tuple(frozenset(grp) for grp in g.groups)] += 1
        expected = math.prod(math.factorial(s) for s in sizes)
        assert set(counts.values()) == {expected}


class TestGroupedSample:
    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            GroupedSample(((0, 1), (1, 2)))

    def test_rejects_empty_group(self):
        with pytest.raises(ValueError):
            GroupedSample(((0,), ()))

import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupies.groupie import (
    degree_profile,
    groupie_mask,
    groupie_report,
    is_groupie,
    structural_identities,
    threshold_counts,
)
from groupies.model import MultipartiteGraph, sample, uniform_spec
from groupies.rng import Seed
from groupies.theory import binomial_tail_exact

from conftest import seeds, small_specs


class TestDegreeProfile:
    def test_star(self, star):
        prof = degree_profile(star)
        assert prof.d.tolist() == [2, 1, 1]
        assert prof.S.tolist() == [2, 2, 2]

    def test_triangle(self, triangle):
        prof = degree_profile(triangle)
        assert prof.d.tolist() == [2, 2, 2]
        assert prof.S.tolist() == [4, 4, 4]

    def test_empty(self, empty_graph):
        prof = degree_profile(empty_graph)
        assert not prof.d.any() and not prof.S.any()

    @given(small_specs(), seeds)
    @settings(max_examples=80, deadline=None)
    def test_against_networkx(self, spec, seed):
        g = sample(spec, Seed(seed))
        G = nx.Graph()
        G.add_nodes_from(range(g.n))
        G.add_edges_from(g.edges().tolist())
        prof = degree_profile(g)
        for x in G.nodes:
            assert prof.d[x] == G.degree(x)
            assert prof.S[x] == sum(G.degree(y) for y in G.neighbors(x))


class TestIsGroupie:
    def test_star_centre(self):
        assert is_groupie(2, 2, "strict")

    def test_triangle_tie(self):
        assert not is_groupie(2, 4, "strict")
        assert is_groupie(2, 4, "non-strict")
        assert is_groupie(2, 4, "nonstrict")

    @pytest.mark.parametrize("conv", ["strict", "nonstrict"])
    def test_isolated(self, conv):
        assert not is_groupie(0, 0, conv)

    def test_large_values_exact(self):
        # d^2 vs S right at 2**40 must not round
        d = 2**20
        assert not is_groupie(d, d * d, "strict")
        assert is_groupie(d, d * d - 1, "strict")

    def test_bad_convention(self):
        with pytest.raises(ValueError):
            is_groupie(1, 1, "loose")

    @given(st.integers(1, 10**6), st.integers(0, 10**12))
    def test_matches_rational_average(self, d, S):
        avg = Fraction(S, d)
        assert is_groupie(d, S, "strict") == (d > avg)
        assert is_groupie(d, S, "nonstrict") == (d >= avg)


class TestGroupieReport:
    def test_star(self, star):
        rep = groupie_report(star)
        assert rep.counts == (1, 0)
        assert rep.total == 1
        assert rep.fractions == (1.0, 0.0)

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_balanced_complete_tripartite(self, m):
        g = sample(uniform_spec([m, m, m], 1.0), 0)
        assert groupie_report(g, convention="strict").total == 0
        assert groupie_report(g, convention="nonstrict").total == 3 * m

    def test_star_expectation_by_enumeration(self):
        # the four subsets of the two cross pairs of parts [1, 2]
        reports = [groupie_report(MultipartiteGraph.from_edges([1, 2], edges)).total
                   for edges in ([], [(0, 1)], [(0, 2)], [(0, 1), (0, 2)])]
        assert reports == [0, 0, 0, 1]
        assert Fraction(sum(reports), 4) == Fraction(1, 4)

    @given(small_specs(), seeds)
    @settings(max_examples=100, deadline=None)
    def test_properties(self, spec, seed):
        g = sample(spec, Seed(seed))
        prof = degree_profile(g)
        ids = structural_identities(g, prof)
        assert ids == {"handshake": True, "neighbor_sum": True}
        strict = groupie_mask(prof, "strict")
        loose = groupie_mask(prof, "nonstrict")
        assert np.all(~strict | loose)
        if g.num_edges:
            assert loose.any()
            assert loose[int(np.argmax(prof.d))]
        rep = groupie_report(g, prof)
        assert rep.total == int(strict.sum())
        assert all(0 <= c <= s for c, s in zip(rep.counts, rep.part_sizes))

    @given(small_specs(), seeds, st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_relabeling_invariance(self, spec, seed, rnd):
        g = sample(spec, Seed(seed))
        perm = []
        for start, size in zip(spec.starts, spec.part_sizes):
            block = list(range(start, start + size))
            rnd.shuffle(block)
            perm += block
        perm = np.array(perm)
        h = MultipartiteGraph.from_edges(spec.part_sizes, perm[g.edges()].tolist())
        for conv in ("strict", "nonstrict"):
            assert groupie_report(g, convention=conv) == groupie_report(h, convention=conv)


class TestThresholdCounts:
    def test_empty(self, empty_graph):
        tc = threshold_counts(empty_graph, upper=0.5, lower=0.5)
        assert tc.above == (0, 0, 0)
        assert tc.below == (2, 2, 2)

    def test_star(self, star):
        tc = threshold_counts(star, upper=1.5, lower=0.5)
        assert tc.above == (1, 0)
        assert tc.below == (0, 0)

    def test_infinite(self, star):
        tc = threshold_counts(star)
        assert tc.above == (0, 0) and tc.below == (0, 0)

    def test_integer_threshold_is_strict(self, star):
        tc = threshold_counts(star, upper=2, lower=1)
        assert tc.above == (0, 0)
        assert tc.below == (0, 0)
        tc = threshold_counts(star, upper=1, lower=1)
        assert tc.above == (1, 0)

    def test_rejects_inverted(self, star):
        with pytest.raises(ValueError):
            threshold_counts(star, upper=1.0, lower=2.0)

    @given(small_specs(), seeds, st.floats(-2, 12), st.floats(0, 8))
    @settings(max_examples=60, deadline=None)
    def test_counts_match_direct(self, spec, seed, lower, width):
        g = sample(spec, Seed(seed))
        upper = lower + width
        tc = threshold_counts(g, upper=upper, lower=lower)
        d = g.degree
        for i, (st_, s) in enumerate(zip(spec.starts, spec.part_sizes)):
            block = d[st_:st_ + s]
            assert tc.above[i] == int(np.sum(block > upper))
            assert tc.below[i] == int(np.sum(block < lower))
            assert tc.above[i] + tc.below[i] <= s

    def _above_count_check(self, upper, trials):
        spec = uniform_spec([300, 300, 300], 0.5)
        above = np.array([threshold_counts(sample(spec, Seed(500 + t)), upper=upper).above[0]
                          for t in range(trials)])
        # degrees within a part use disjoint edges, so the count is Bin(300, P)
        P = binomial_tail_exact(600, 0.5, math.floor(upper) + 1)
        se = math.sqrt(300 * P * (1 - P) / trials)
        assert abs(above.mean() - 300 * P) <= 4 * se
        return above.mean(), 300 * P

    def test_above_count_paper_threshold(self):
        n = 900
        self._above_count_check((1 - 1 / 3) * n * 0.5 + 50 * math.sqrt(math.log(n)), 200)

    def test_above_count_reachable_threshold(self):
        mean, expected = self._above_count_check(310.0, 200)
        assert expected > 50

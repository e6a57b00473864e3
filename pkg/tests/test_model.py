import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings

from groupies import model
from groupies.model import MultipartiteGraph, PartitionSpec, sample, uniform_spec, validate
from groupies.rng import Seed, pair_draws

from conftest import seeds, small_specs


class TestUniformSpec:
    def test_star_spec(self):
        spec = uniform_spec([1, 2], 1.0)
        assert spec.edge_prob.tolist() == [[0.0, 1.0], [1.0, 0.0]]
        assert spec.n == 3

    def test_zero_probability(self):
        spec = uniform_spec([2, 2, 2], 0.0)
        assert not spec.edge_prob.any()

    def test_definition_instance(self):
        spec = uniform_spec([300, 300, 300], 0.5)
        assert spec.n == 900
        assert spec.fractions[0] == pytest.approx(1 / 3)
        assert spec.fractions[1] == pytest.approx(1 / 3)
        assert np.all(np.diag(spec.edge_prob) == 0)
        assert spec.uniform_p == 0.5

    @pytest.mark.parametrize("sizes,p", [
        ([5], 0.5), ([], 0.5), ([2, 0, 1], 0.5), ([2, 2], -0.1), ([2, 2], 1.5),
    ])
    def test_rejects(self, sizes, p):
        with pytest.raises(ValueError):
            uniform_spec(sizes, p)

    def test_matrix_validation(self):
        with pytest.raises(ValueError, match="symmetric"):
            PartitionSpec((1, 1), [[0, 0.2], [0.3, 0]])
        with pytest.raises(ValueError, match="diagonal"):
            PartitionSpec((1, 1), [[0.1, 0.2], [0.2, 0]])
        with pytest.raises(ValueError, match="shape"):
            PartitionSpec((1, 1, 1), [[0, 0.2], [0.2, 0]])

    def test_immutable(self):
        spec = uniform_spec([2, 3], 0.5)
        with pytest.raises(ValueError):
            spec.edge_prob[0, 1] = 0.9
        assert spec == uniform_spec([2, 3], 0.5)
        assert hash(spec) == hash(uniform_spec([2, 3], 0.5))


class TestSample:
    def test_star(self):
        g = sample(uniform_spec([1, 2], 1.0), Seed(123))
        assert g.edges().tolist() == [[0, 1], [0, 2]]

    def test_empty(self):
        g = sample(uniform_spec([2, 2, 2], 0.0), 9)
        assert g.num_edges == 0
        assert g.degree.tolist() == [0] * 6

    def test_complete_multipartite(self):
        spec = uniform_spec([2, 3, 4], 1.0)
        g = sample(spec, 0)
        assert g.num_edges == spec.cross_pairs() == 2 * 3 + 2 * 4 + 3 * 4
        assert validate(g, spec) == []

    def test_edge_count_mean(self):
        # |E| ~ Bin(4, 1/2): mean 2, variance 1
        spec = uniform_spec([2, 2], 0.5)
        T = 10_000
        counts = np.array([sample(spec, Seed(s)).num_edges for s in range(T)])
        assert abs(counts.mean() - 2.0) <= 3 * math.sqrt(1.0 / T)

    @pytest.mark.parametrize("spec", [
        uniform_spec([3, 4, 5], 0.3),
        uniform_spec([40, 60], 0.02),  # sparse path
        PartitionSpec((3, 5, 2), [[0, 0.5, 0.05], [0.5, 0, 1.0], [0.05, 1.0, 0]]),
    ])
    def test_edge_count_distribution(self, spec):
        T = 3000
        mean = spec.expected_edges()
        var = sum(spec.part_sizes[i] * spec.part_sizes[j] * q * (1 - q) for _, i, j, q in spec.blocks())
        counts = np.array([sample(spec, Seed(1000 + s)).num_edges for s in range(T)])
        assert abs(counts.mean() - mean) <= 4 * math.sqrt(var / T)

    @pytest.mark.parametrize("sizes,p", [([3, 4, 5], 0.5), ([50, 30, 20], 0.04)])
    def test_degree_law(self, sizes, p):
        # degree of a part-i vertex ~ Bin(n - s_i, p)
        spec = uniform_spec(sizes, p)
        T = 2000
        starts = spec.starts
        degs = np.array([sample(spec, Seed(77 + s)).degree[list(starts)] for s in range(T)])
        for i, s_i in enumerate(sizes):
            m = spec.n - s_i
            se = math.sqrt(m * p * (1 - p) / T)
            assert abs(degs[:, i].mean() - m * p) <= 4 * se

    def test_deterministic(self):
        spec = uniform_spec([30, 40, 50], 0.3)
        assert sample(spec, 5) == sample(spec, 5)
        assert sample(spec, 5) != sample(spec, 6)

    @pytest.mark.parametrize("p", [0.5, 0.01])
    def test_thread_count_does_not_matter(self, monkeypatch, p):
        monkeypatch.setattr(model, "SEGMENT_PAIRS", 256)
        spec = uniform_spec([30, 40, 50], p)
        assert sample(spec, 3, threads=1) == sample(spec, 3, threads=8)

    def test_dense_path_independent_of_chunking(self, monkeypatch):
        spec = uniform_spec([30, 40, 50], 0.5)
        ref = sample(spec, 11)
        for seg in (4, 64, 1000):
            monkeypatch.setattr(model, "SEGMENT_PAIRS", seg)
            assert sample(spec, 11) == ref

    def test_pair_draws_are_addressed_by_index(self):
        seed = Seed(42)
        whole = pair_draws(seed, 2, 0, 103)
        for start in (0, 1, 5, 17, 50):
            part = pair_draws(seed, 2, start, 103 - start)
            assert np.array_equal(part, whole[start:])

    def test_sparse_matches_dense_marginal(self):
        # both paths must give each pair probability q
        q = 0.09
        spec = uniform_spec([60, 60], q)
        T = 400
        counts = np.array([sample(spec, s).num_edges for s in range(T)])
        M = 3600
        assert abs(counts.mean() - M * q) <= 4 * math.sqrt(M * q * (1 - q) / T)

    @given(small_specs(), seeds)
    @settings(max_examples=150, deadline=None)
    def test_sampled_graphs_are_valid(self, spec, seed):
        g = sample(spec, Seed(seed))
        assert validate(g, spec) == []
        assert int(g.degree.sum()) == 2 * g.num_edges
        part = g.part_of
        e = g.edges()
        assert np.all(part[e[:, 0]] != part[e[:, 1]])
        assert np.all(e[:, 0] < e[:, 1])
        # q = 0 blocks stay empty, q = 1 blocks are complete
        for _, i, j, q in spec.blocks():
            between = np.sum((part[e[:, 0]] == i) & (part[e[:, 1]] == j))
            if q == 0.0:
                assert between == 0
            if q == 1.0:
                assert between == spec.part_sizes[i] * spec.part_sizes[j]


class TestValidate:
    def test_clean(self):
        spec = uniform_spec([4, 5, 6], 0.5)
        assert validate(sample(spec, 1), spec) == []

    def test_intra_part_edge(self):
        spec = uniform_spec([2, 2], 1.0)
        edges = sample(spec, 1).edges().tolist() + [(0, 1)]
        bad = MultipartiteGraph.from_edges([2, 2], edges)
        v = validate(bad, spec)
        assert [x.kind for x in v] == ["intra-part edge"]

    def test_degree_mismatch(self):
        spec = uniform_spec([3, 3], 0.5)
        g = sample(spec, 4)
        deg = g.degree.copy()
        deg[2] += 1
        v = validate(replace(g, degree=deg), spec)
        assert [x.kind for x in v] == ["degree mismatch"]

    def test_self_loop_and_asymmetry(self):
        g = MultipartiteGraph((1, 1), indptr=[0, 2, 2], indices=[0, 1], degree=[2, 0])
        kinds = sorted(x.kind for x in validate(g))
        assert kinds == ["asymmetric", "self-loop"]

    def test_part_size_mismatch(self):
        g = sample(uniform_spec([2, 2], 0.5), 0)
        assert [x.kind for x in validate(g, uniform_spec([1, 3], 0.5))] == ["part sizes"]

    def test_graph_is_read_only(self):
        g = sample(uniform_spec([2, 2], 1.0), 0)
        with pytest.raises(ValueError):
            g.degree[0] = 5

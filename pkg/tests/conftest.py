from fractions import Fraction
from itertools import product

import networkx as nx
import pytest
from hypothesis import strategies as st

from groupies.model import MultipartiteGraph, PartitionSpec, uniform_spec


def brute_groupie_law(part_sizes, edge_prob, strict=True):
    """Independent oracle: enumerate every cross-pair subset with networkx.

    Returns {N: probability} and the per-part expectation, as Fractions.
    ``edge_prob`` entries are given as Fractions.
    """
    starts = [sum(part_sizes[:i]) for i in range(len(part_sizes))]
    part = [i for i, s in enumerate(part_sizes) for _ in range(s)]
    n = sum(part_sizes)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if part[u] != part[v]]
    law = {}
    part_means = [Fraction(0)] * len(part_sizes)
    for mask in product((0, 1), repeat=len(pairs)):
        w = Fraction(1)
        G = nx.Graph()
        G.add_nodes_from(range(n))
        for bit, (u, v) in zip(mask, pairs):
            q = edge_prob[part[u]][part[v]]
            w *= q if bit else 1 - q
            if bit:
                G.add_edge(u, v)
        if w == 0:
            continue
        per_part = [0] * len(part_sizes)
        for x in G.nodes:
            d = G.degree(x)
            if d == 0:
                continue
            avg = Fraction(sum(G.degree(y) for y in G.neighbors(x)), d)
            if (d > avg) if strict else (d >= avg):
                per_part[part[x]] += 1
        N = sum(per_part)
        law[N] = law.get(N, Fraction(0)) + w
        for i, c in enumerate(per_part):
            part_means[i] += w * c
    assert starts[0] == 0
    return law, part_means


def uniform_matrix(k, q):
    return [[Fraction(0) if i == j else Fraction(q) for j in range(k)] for i in range(k)]


@pytest.fixture
def star():
    """Parts [1, 2] with both cross edges: centre 0, leaves 1 and 2."""
    return MultipartiteGraph.from_edges([1, 2], [(0, 1), (0, 2)])


@pytest.fixture
def triangle():
    return MultipartiteGraph.from_edges([1, 1, 1], [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def empty_graph():
    return MultipartiteGraph.from_edges([2, 2, 2], [])


@st.composite
def small_specs(draw, max_parts=4, max_size=6, dense_only=False):
    k = draw(st.integers(2, max_parts))
    sizes = draw(st.lists(st.integers(1, max_size), min_size=k, max_size=k))
    choices = [0.0, 0.25, 0.5, 0.75, 1.0] if dense_only else [0.0, 0.03, 0.25, 0.5, 0.75, 1.0]
    if draw(st.booleans()):
        return uniform_spec(sizes, draw(st.sampled_from(choices)))
    mat = [[0.0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            mat[i][j] = mat[j][i] = draw(st.sampled_from(choices))
    return PartitionSpec(tuple(sizes), mat)


seeds = st.integers(0, 2**64 - 1)

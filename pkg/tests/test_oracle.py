from fractions import Fraction

import numpy as np
import pytest

from groupies.model import PartitionSpec, uniform_spec
from groupies.montecarlo import ExperimentConfig, run
from groupies.oracle import (
    MAX_PAIRS,
    OracleCapacityError,
    UndefinedConditionalError,
    exact_conditional_mean_S,
    exact_groupie_distribution,
)
from groupies.rng import Seed

from conftest import brute_groupie_law, uniform_matrix


class TestExamples:
    def test_single_edge(self):
        d = exact_groupie_distribution(uniform_spec([1, 1], 0.5))
        assert d.mean == 0
        assert d.total == ((0, Fraction(1)),)

    def test_star(self):
        d = exact_groupie_distribution(uniform_spec([1, 2], 0.5), "strict")
        assert d.mean == Fraction(1, 4)
        assert d.variance == Fraction(3, 16)
        assert d.part_means == (Fraction(1, 4), Fraction(0))
        assert d.configurations == 4

    def test_triangle(self):
        d = exact_groupie_distribution(uniform_spec([1, 1, 1], 0.5), "strict")
        assert d.mean == Fraction(3, 8)
        assert d.total == ((0, Fraction(5, 8)), (1, Fraction(3, 8)))


SPECS = [
    ([1, 2], uniform_matrix(2, Fraction(1, 2))),
    ([2, 2], uniform_matrix(2, Fraction(1, 2))),
    ([1, 1, 1], uniform_matrix(3, Fraction(3, 10))),
    ([1, 2, 2], uniform_matrix(3, Fraction(1, 2))),
    ([1, 1, 1, 1], uniform_matrix(4, Fraction(1, 4))),
    ([2, 1, 2], [[0, Fraction(1, 2), Fraction(1, 10)],
                 [Fraction(1, 2), 0, 1],
                 [Fraction(1, 10), 1, 0]]),
]


@pytest.mark.parametrize("sizes,mat", SPECS)
@pytest.mark.parametrize("strict", [True, False])
def test_matches_independent_enumeration(sizes, mat, strict):
    spec = PartitionSpec(tuple(sizes), [[float(x) for x in row] for row in mat])
    law, part_means = brute_groupie_law(sizes, mat, strict)
    d = exact_groupie_distribution(spec, "strict" if strict else "nonstrict")
    assert dict(d.total) == {k: v for k, v in law.items() if v}
    assert d.part_means == tuple(part_means)
    assert sum(p for _, p in d.total) == 1


@pytest.mark.parametrize("sizes", [[2, 2, 2], [1, 3, 1], [3, 3]])
def test_probability_mass_and_expectations(sizes):
    d = exact_groupie_distribution(uniform_spec(sizes, 0.5))
    assert sum(p for _, p in d.total) == 1
    for law in d.parts:
        assert sum(p for _, p in law) == 1
    assert d.mean == sum(d.part_means)


@pytest.mark.parametrize("sizes,p", [([2, 2, 2], 0.5), ([3, 3], 0.3), ([1, 1, 1, 1], 0.7)])
def test_symmetric_parts_have_equal_means(sizes, p):
    means = exact_groupie_distribution(uniform_spec(sizes, p)).part_means
    assert len(set(means)) == 1


@pytest.mark.parametrize("sizes,p", [([1, 2], 0.5), ([2, 2, 1], 0.3), ([1, 1, 1, 2], 0.5)])
def test_nonstrict_dominates(sizes, p):
    spec = uniform_spec(sizes, p)
    assert exact_groupie_distribution(spec, "nonstrict").mean >= exact_groupie_distribution(spec, "strict").mean


def test_capacity():
    spec = uniform_spec([5, 5], 0.5)
    with pytest.raises(OracleCapacityError, match=f"MAX_PAIRS={MAX_PAIRS}"):
        exact_groupie_distribution(spec)
    # forced pairs do not count towards the cap
    assert exact_groupie_distribution(uniform_spec([5, 5], 1.0)).free_pairs == 0


def test_threads_do_not_change_result(monkeypatch):
    from groupies import oracle
    monkeypatch.setattr(oracle, "CHUNK_BITS", 4)
    spec = uniform_spec([2, 2, 2], 0.5)
    assert exact_groupie_distribution(spec, threads=1) == exact_groupie_distribution(spec, threads=4)


class TestConditional:
    def test_star_full(self):
        c = exact_conditional_mean_S(uniform_spec([1, 2], 0.5), 0, 2)
        assert c.mean == 2
        assert c.probability == Fraction(1, 4)

    def test_zero_degree(self):
        assert exact_conditional_mean_S(uniform_spec([1, 2], 0.5), 0, 0).mean == 0

    def test_triangle(self):
        assert exact_conditional_mean_S(uniform_spec([1, 1, 1], 0.5), 0, 2).mean == 3

    def test_against_enumeration(self):
        # vertex 0 in parts [1, 2, 2]: brute force over all 2^8 subsets
        from itertools import product
        sizes = [1, 2, 2]
        part = [0, 1, 1, 2, 2]
        pairs = [(u, v) for u in range(5) for v in range(u + 1, 5) if part[u] != part[v]]
        num = {d: Fraction(0) for d in range(5)}
        den = {d: Fraction(0) for d in range(5)}
        for mask in product((0, 1), repeat=len(pairs)):
            edges = [e for b, e in zip(mask, pairs) if b]
            deg = [sum(x in e for e in edges) for x in range(5)]
            S0 = sum(deg[v] for u, v in edges if u == 0)
            w = Fraction(1, 2 ** len(pairs))
            num[deg[0]] += w * S0
            den[deg[0]] += w
        spec = uniform_spec(sizes, 0.5)
        for d in range(5):
            assert exact_conditional_mean_S(spec, 0, d).mean == num[d] / den[d]

    def test_undefined(self):
        with pytest.raises(UndefinedConditionalError):
            exact_conditional_mean_S(uniform_spec([1, 2], 1.0), 0, 1)
        with pytest.raises(ValueError):
            exact_conditional_mean_S(uniform_spec([1, 2], 0.5), 0, 3)


@pytest.mark.slow
@pytest.mark.parametrize("sizes", [[1, 2], [1, 1, 1], [2, 2], [2, 2, 2], [1, 2, 3]])
def test_sampler_agrees_with_oracle(sizes):
    spec = uniform_spec(sizes, 0.5)
    exact = exact_groupie_distribution(spec)
    T = 100_000
    res = run(ExperimentConfig(spec, T, Seed(2024)))
    values, counts = np.unique(res.N, return_counts=True)
    observed = dict(zip(values.tolist(), (counts / T).tolist()))
    for v, p in exact.total:
        p = float(p)
        se = np.sqrt(p * (1 - p) / T)
        assert abs(observed.get(v, 0.0) - p) <= 4 * se
    assert set(observed) <= {v for v, _ in exact.total}

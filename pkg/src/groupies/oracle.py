"""Ground truth for tiny specs by enumerating every cross-part edge subset.

Configurations are first counted with integers, grouped by how many edges
fall in each part-pair block; probabilities are attached afterwards as exact
rationals (a float probability is read by its shortest decimal, so 0.5 is
1/2 and 0.3 is 3/10). Chunks may run on several threads; integer counts make
the reduction order-independent.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from ._validation import check_convention, check_count
from .model import PartitionSpec, cross_pair_list
from .theory import rational

# largest number of free vertex pairs the oracle will enumerate (2**24 configurations)
MAX_PAIRS = 24
CHUNK_BITS = 16


class OracleCapacityError(ValueError):
    pass


class UndefinedConditionalError(ValueError):
    pass


@dataclass(frozen=True)
class ExactDistribution:
    """Exact laws of the total groupie count N and of every per-part count."""

    free_pairs: int
    total: tuple[tuple[int, Fraction], ...]
    parts: tuple[tuple[tuple[int, Fraction], ...], ...]
    convention: str

    @property
    def configurations(self) -> int:
        return 2**self.free_pairs

    @staticmethod
    def _mean(law) -> Fraction:
        return sum((v * p for v, p in law), Fraction(0))

    @staticmethod
    def _var(law) -> Fraction:
        mean = ExactDistribution._mean(law)
        return sum((v * v * p for v, p in law), Fraction(0)) - mean * mean

    @property
    def mean(self) -> Fraction:
        return self._mean(self.total)

    @property
    def variance(self) -> Fraction:
        return self._var(self.total)

    @property
    def part_means(self) -> tuple[Fraction, ...]:
        return tuple(self._mean(law) for law in self.parts)

    @property
    def part_variances(self) -> tuple[Fraction, ...]:
        return tuple(self._var(law) for law in self.parts)

    def probability(self, value: int) -> Fraction:
        return dict(self.total).get(value, Fraction(0))


def free_pair_count(spec: PartitionSpec) -> int:
    """Cross pairs whose edge is genuinely random (0 < q < 1)."""
    return sum(spec.part_sizes[i] * spec.part_sizes[j]
               for _, i, j, q in spec.blocks() if 0.0 < q < 1.0)


class _Enumerator:
    """Shared machinery: free pairs, forced pairs, chunked degree/neighbor-sum evaluation."""

    def __init__(self, spec: PartitionSpec):
        self.spec = spec
        pairs = cross_pair_list(spec)
        part = spec.part_of()
        q = spec.edge_prob[part[pairs[:, 0]], part[pairs[:, 1]]] if len(pairs) else np.zeros(0)
        self.forced = pairs[q >= 1.0]
        free = (q > 0.0) & (q < 1.0)
        self.free = pairs[free]
        self.m = len(self.free)
        if self.m > MAX_PAIRS:
            raise OracleCapacityError(
                f"spec has {self.m} free vertex pairs; exact enumeration is capped at "
                f"MAX_PAIRS={MAX_PAIRS} (2**{MAX_PAIRS} configurations)"
            )
        # group free pairs by their probability so weights factor per group
        probs = q[free]
        self.levels = sorted(set(probs.tolist()))
        self.level_of = np.array([self.levels.index(x) for x in probs], dtype=np.int64)
        self.level_size = [int(np.sum(self.level_of == g)) for g in range(len(self.levels))]
        self.radix = []
        r = 1
        for size in self.level_size:
            self.radix.append(r)
            r *= size + 1
        self.n_groups = r

    def chunks(self):
        total = 1 << self.m
        step = 1 << min(self.m, CHUNK_BITS)
        return [(lo, min(total, lo + step)) for lo in range(0, total, step)]

    def evaluate(self, lo: int, hi: int):
        """Degrees, neighbor sums and weight-group keys for configurations lo..hi-1.

        Arrays are vertex-major, shape ``(n, hi - lo)``.
        """
        n = self.spec.n
        conf = np.arange(lo, hi, dtype=np.int64)
        bits = ((conf[None, :] >> np.arange(self.m)[:, None]) & 1).astype(np.int32)
        deg = np.zeros((n, len(conf)), dtype=np.int32)
        for u, v in self.forced:
            deg[u] += 1
            deg[v] += 1
        for e, (u, v) in enumerate(self.free):
            deg[u] += bits[e]
            deg[v] += bits[e]
        S = np.zeros_like(deg)
        for u, v in self.forced:
            S[u] += deg[v]
            S[v] += deg[u]
        for e, (u, v) in enumerate(self.free):
            S[u] += bits[e] * deg[v]
            S[v] += bits[e] * deg[u]
        group = np.zeros(len(conf), dtype=np.int64)
        for g, r in enumerate(self.radix):
            group += bits[self.level_of == g].sum(axis=0, dtype=np.int64) * r
        return deg, S, group

    def weights(self) -> list[Fraction]:
        """Exact probability of one configuration in each weight group."""
        qs = [rational(x) for x in self.levels]
        out = [Fraction(0)] * self.n_groups
        for counts in product(*(range(s + 1) for s in self.level_size)):
            key = sum(c * r for c, r in zip(counts, self.radix))
            w = Fraction(1)
            for c, size, q in zip(counts, self.level_size, qs):
                w *= q**c * (1 - q) ** (size - c)
            out[key] = w
        return out

    def tally(self, keys_fn, sizes, threads: int):
        """Sum integer histograms over all chunks.

        ``keys_fn`` returns, per histogram, either a key array or a
        ``(keys, integer_weights)`` pair.
        """

        def hist(spec, size):
            if isinstance(spec, tuple):
                keys, w = spec
                # float accumulation is exact: every partial sum stays far below 2**53
                return np.rint(np.bincount(keys, weights=w, minlength=size)).astype(np.int64)
            return np.bincount(spec, minlength=size)

        def work(bounds):
            deg, S, group = self.evaluate(*bounds)
            return [hist(k, s) for k, s in zip(keys_fn(deg, S, group), sizes)]

        chunks = self.chunks()
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(work, chunks))
        else:
            results = [work(c) for c in chunks]
        totals = [np.zeros(s, dtype=np.int64) for s in sizes]
        for res in results:
            for acc, h in zip(totals, res):
                acc += h
        return totals


def _law(counts: np.ndarray, n_groups: int, weights: list[Fraction]) -> tuple[tuple[int, Fraction], ...]:
    table = counts.reshape(-1, n_groups)
    law = []
    for value, row in enumerate(table):
        nz = np.flatnonzero(row)
        if len(nz) == 0:
            continue
        p = sum((int(row[g]) * weights[g] for g in nz), Fraction(0))
        if p:
            law.append((value, p))
    return tuple(law)


def exact_groupie_distribution(spec: PartitionSpec, convention: str = "strict",
                               threads: int = 1) -> ExactDistribution:
    """Exact distribution of the groupie counts N and N(B_i)."""
    convention = check_convention(convention)
    threads = check_count(threads, "threads")
    en = _Enumerator(spec)
    part = spec.part_of()
    sizes = spec.part_sizes
    G = en.n_groups

    def keys(deg, S, group):
        sq = deg * deg
        hit = ((sq > S) if convention == "strict" else (sq >= S)) & (deg > 0)
        per_part = [hit[part == i].sum(axis=0) for i in range(spec.k)]
        total = hit.sum(axis=0)
        return [total * G + group] + [c * G + group for c in per_part]

    hist = en.tally(keys, [(spec.n + 1) * G] + [(s + 1) * G for s in sizes], threads)
    weights = en.weights()
    return ExactDistribution(
        free_pairs=en.m,
        total=_law(hist[0], G, weights),
        parts=tuple(_law(h, G, weights) for h in hist[1:]),
        convention=convention,
    )


@dataclass(frozen=True)
class ConditionalMean:
    vertex: int
    degree: int
    mean: Fraction
    probability: Fraction


def exact_conditional_mean_S(spec: PartitionSpec, part: int, d: int, threads: int = 1) -> ConditionalMean:
    """Exact ``E[S_x | d_x = d]`` for the first vertex ``x`` of ``part``."""
    x = spec.starts[part]
    max_deg = spec.n - spec.part_sizes[part]
    if not 0 <= d <= max_deg:
        raise ValueError(f"degree {d} outside [0, {max_deg}] for part {part}")
    en = _Enumerator(spec)
    G = en.n_groups
    # two histograms over (d_x, group): configuration counts and S_x-weighted counts
    cells = (max_deg + 1) * G

    def keys(deg, S, group):
        key = deg[x].astype(np.int64) * G + group
        return [key, (key, S[x])]

    counts, weighted = en.tally(keys, [cells, cells], threads)
    weights = en.weights()
    row = slice(d * G, (d + 1) * G)
    mass = sum((int(c) * w for c, w in zip(counts[row], weights)), Fraction(0))
    if mass == 0:
        raise UndefinedConditionalError(f"P(d_x = {d}) = 0 for vertex {x}; conditional mean undefined")
    total = sum((int(c) * w for c, w in zip(weighted[row], weights)), Fraction(0))
    return ConditionalMean(vertex=x, degree=d, mean=total / mass, probability=mass)

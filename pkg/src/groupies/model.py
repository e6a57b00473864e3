"""Random multipartite graphs with independent cross-part Bernoulli edges."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._validation import (
    check_count,
    check_edge_prob,
    check_part_sizes,
    check_probability,
)
from .rng import (
    SPARSE_EDGES,
    Seed,
    as_seed,
    bernoulli_threshold,
    pair_draws,
    philox,
    uniform_open,
)

# a block whose edge probability reaches this is sampled pair by pair
DENSE_FRACTION = 0.1
# pairs handled by one task; a multiple of 4 so Philox blocks never straddle tasks
SEGMENT_PAIRS = 1 << 20


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PartitionSpec:
    """Part sizes plus the symmetric cross-part edge-probability matrix."""

    part_sizes: tuple[int, ...]
    edge_prob: np.ndarray

    def __post_init__(self):
        sizes = check_part_sizes(self.part_sizes)
        object.__setattr__(self, "part_sizes", sizes)
        object.__setattr__(self, "edge_prob", check_edge_prob(self.edge_prob, len(sizes)))

    @classmethod
    def uniform(cls, part_sizes: Sequence[int], p: float) -> "PartitionSpec":
        sizes = check_part_sizes(part_sizes)
        p = check_probability(p)
        k = len(sizes)
        mat = np.full((k, k), p)
        np.fill_diagonal(mat, 0.0)
        return cls(sizes, mat)

    def __eq__(self, other):
        if not isinstance(other, PartitionSpec):
            return NotImplemented
        return self.part_sizes == other.part_sizes and np.array_equal(
            self.edge_prob, other.edge_prob
        )

    def __hash__(self):
        return hash((self.part_sizes, self.edge_prob.tobytes()))

    def __repr__(self):
        if self.uniform_p is not None:
            return f"PartitionSpec.uniform({list(self.part_sizes)}, p={self.uniform_p})"
        return f"PartitionSpec({list(self.part_sizes)}, edge_prob={self.edge_prob.tolist()})"

    @property
    def k(self) -> int:
        return len(self.part_sizes)

    @property
    def n(self) -> int:
        return sum(self.part_sizes)

    @property
    def starts(self) -> tuple[int, ...]:
        out, acc = [], 0
        for s in self.part_sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    @property
    def fractions(self) -> tuple[float, ...]:
        n = self.n
        return tuple(s / n for s in self.part_sizes)

    @property
    def uniform_p(self) -> float | None:
        """The common off-diagonal probability, or None if entries differ."""
        off = self.edge_prob[~np.eye(self.k, dtype=bool)]
        return float(off[0]) if np.all(off == off[0]) else None

    def part_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.part_sizes)

    def blocks(self) -> list[tuple[int, int, int, float]]:
        """Part pairs ``(block_id, i, j, q)`` with ``i < j`` in canonical order."""
        out = []
        b = 0
        for i in range(self.k):
            for j in range(i + 1, self.k):
                out.append((b, i, j, float(self.edge_prob[i, j])))
                b += 1
        return out

    def cross_pairs(self) -> int:
        s = self.part_sizes
        return sum(s[i] * s[j] for _, i, j, _ in self.blocks())

    def expected_edges(self) -> float:
        s = self.part_sizes
        return math.fsum(s[i] * s[j] * q for _, i, j, q in self.blocks())


def uniform_spec(part_sizes: Sequence[int], p: float) -> PartitionSpec:
    """Spec with the same edge probability ``p`` between every pair of parts."""
    return PartitionSpec.uniform(part_sizes, p)


@dataclass(frozen=True, eq=False)
class MultipartiteGraph:
    """Immutable undirected graph in CSR form with sorted neighbor lists.

    Vertices ``0 .. s_0-1`` form part 0, the next ``s_1`` part 1, and so on.
    """

    part_sizes: tuple[int, ...]
    indptr: np.ndarray
    indices: np.ndarray
    degree: np.ndarray
    _part_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "part_sizes", tuple(int(s) for s in self.part_sizes))
        for name in ("indptr", "indices", "degree"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, _readonly(arr))
        part_of = np.repeat(np.arange(len(self.part_sizes)), self.part_sizes)
        object.__setattr__(self, "_part_of", _readonly(part_of))

    @classmethod
    def from_edges(cls, part_sizes: Sequence[int], edges: Iterable[tuple[int, int]]) -> "MultipartiteGraph":
        """Build a graph from undirected edges; no multipartite checks are applied."""
        n = sum(part_sizes)
        arr = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        keys = np.unique(u * n + v)
        return _graph_from_pairs(tuple(part_sizes), keys // n, keys % n)

    @property
    def n(self) -> int:
        return len(self.degree)

    @property
    def k(self) -> int:
        return len(self.part_sizes)

    @property
    def part_of(self) -> np.ndarray:
        return self._part_of

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array, ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def to_dense(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.int8)
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        adj[src, self.indices] = 1
        return adj

    def __eq__(self, other):
        if not isinstance(other, MultipartiteGraph):
            return NotImplemented
        return (
            self.part_sizes == other.part_sizes
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.degree, other.degree)
        )

    __hash__ = None

    def __repr__(self):
        return f"MultipartiteGraph(parts={list(self.part_sizes)}, n={self.n}, edges={self.num_edges})"


def _graph_from_pairs(part_sizes: tuple[int, ...], u: np.ndarray, v: np.ndarray) -> MultipartiteGraph:
    n = sum(part_sizes)
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    keys = src * n + dst
    keys.sort()
    src, dst = np.divmod(keys, n)
    degree = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degree, out=indptr[1:])
    return MultipartiteGraph(part_sizes, indptr, dst, degree)


def _dense_segment(seed: Seed, block: int, q: float, lo: int, hi: int) -> np.ndarray:
    raw = pair_draws(seed, block, lo, hi - lo)
    cut = bernoulli_threshold(q)
    if cut is None:
        return np.arange(lo, hi, dtype=np.int64)
    return np.flatnonzero(raw < np.uint64(cut)) + lo


def _sparse_segment(seed: Seed, block: int, segment: int, q: float, lo: int, hi: int) -> np.ndarray:
    # geometric gaps between successes; one sequential substream per segment
    length = hi - lo
    gen = philox(seed, SPARSE_EDGES, (0, block, segment, 0))
    log1mq = math.log1p(-q)
    mean = length * q
    batch = int(mean + 6.0 * math.sqrt(mean) + 16)
    found = []
    pos = -1
    while True:
        u = uniform_open(gen.random_raw(batch))
        gaps = np.minimum(np.floor(np.log(u) / log1mq), length)
        steps = np.cumsum(gaps.astype(np.int64) + 1) + pos
        inside = steps[steps < length]
        found.append(inside)
        if len(inside) < len(steps):
            break
        pos = int(steps[-1])
        batch = max(16, batch // 4)
    return np.concatenate(found) + lo


def _segments(spec: PartitionSpec):
    for block, i, j, q in spec.blocks():
        if q <= 0.0:
            continue
        total = spec.part_sizes[i] * spec.part_sizes[j]
        for seg, lo in enumerate(range(0, total, SEGMENT_PAIRS)):
            yield block, i, j, q, seg, lo, min(total, lo + SEGMENT_PAIRS)


def sample(spec: PartitionSpec, seed=0, threads: int = 1) -> MultipartiteGraph:
    """Draw one graph: each cross-part pair is an edge independently.

    Pair ``{u, v}`` between parts ``i < j`` gets probability ``edge_prob[i, j]``.
    The output depends only on ``(spec, seed)``; ``threads`` only changes how
    the independent segments are scheduled.
    """
    seed = as_seed(seed)
    threads = check_count(threads, "threads")
    starts = spec.starts
    sizes = spec.part_sizes
    work = list(_segments(spec))

    def run(task):
        block, i, j, q, seg, lo, hi = task
        if q >= DENSE_FRACTION:
            flat = _dense_segment(seed, block, q, lo, hi)
        else:
            flat = _sparse_segment(seed, block, seg, q, lo, hi)
        a, b = np.divmod(flat, sizes[j])
        return a + starts[i], b + starts[j]

    if threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, work))
    else:
        parts = [run(t) for t in work]
    if parts:
        u = np.concatenate([p[0] for p in parts])
        v = np.concatenate([p[1] for p in parts])
    else:
        u = v = np.zeros(0, dtype=np.int64)
    return _graph_from_pairs(sizes, u, v)


def dense_edge_mask(spec: PartitionSpec, seed=0) -> np.ndarray:
    """Edge indicators for every cross pair, in canonical block order.

    Agrees with :func:`sample` for specs whose nonzero blocks all use the dense
    path; the Monte Carlo harness uses it to evaluate many tiny graphs at once.
    """
    return dense_edge_masks(spec, [seed])[0]


def dense_edge_masks(spec: PartitionSpec, seeds) -> np.ndarray:
    """Stacked :func:`dense_edge_mask` rows, one per seed."""
    seeds = [as_seed(s) for s in seeds]
    total = spec.cross_pairs()
    out = np.zeros((len(seeds), total), dtype=bool)
    offset = 0
    for block, i, j, q in spec.blocks():
        size = spec.part_sizes[i] * spec.part_sizes[j]
        cols = slice(offset, offset + size)
        offset += size
        if q <= 0.0:
            continue
        if q < DENSE_FRACTION:
            raise ValueError("dense_edge_mask requires every nonzero block to be dense")
        cut = bernoulli_threshold(q)
        if cut is None:
            out[:, cols] = True
            continue
        cut = np.uint64(cut)
        for row, seed in enumerate(seeds):
            out[row, cols] = pair_draws(seed, block, 0, size) < cut
    return out


def cross_pair_list(spec: PartitionSpec) -> np.ndarray:
    """All cross pairs ``(u, v)`` in the canonical order used by the sampler."""
    starts, sizes = spec.starts, spec.part_sizes
    rows = []
    for _, i, j, _ in spec.blocks():
        a, b = np.divmod(np.arange(sizes[i] * sizes[j]), sizes[j])
        rows.append(np.column_stack([a + starts[i], b + starts[j]]))
    return np.concatenate(rows) if rows else np.zeros((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def validate(graph: MultipartiteGraph, spec: PartitionSpec | None = None) -> list[Violation]:
    """List every broken graph invariant; an empty list means the graph is sound."""
    out: list[Violation] = []
    n = graph.n
    if spec is not None and graph.part_sizes != spec.part_sizes:
        out.append(Violation("part sizes", f"graph {list(graph.part_sizes)} vs spec {list(spec.part_sizes)}"))
    if sum(graph.part_sizes) != n:
        out.append(Violation("part sizes", f"sizes sum to {sum(graph.part_sizes)} but n={n}"))
        return out
    if len(graph.indptr) != n + 1 or graph.indptr[0] != 0 or graph.indptr[-1] != len(graph.indices) \
            or np.any(np.diff(graph.indptr) < 0):
        out.append(Violation("structure", "indptr is not a valid CSR offset array"))
        return out
    if len(graph.indices) and (graph.indices.min() < 0 or graph.indices.max() >= n):
        out.append(Violation("structure", "neighbor id out of range"))
        return out

    counts = np.diff(graph.indptr)
    src = np.repeat(np.arange(n), counts)
    dst = graph.indices
    for x in np.flatnonzero(src == dst)[:1000]:
        out.append(Violation("self-loop", f"vertex {int(src[x])}"))

    keys = src * n + dst
    if len(keys) > 1:
        same_row = src[1:] == src[:-1]
        bad = same_row & (dst[1:] <= dst[:-1])
        for x in np.unique(src[1:][bad])[:1000]:
            out.append(Violation("unsorted neighbors", f"vertex {int(x)} has unsorted or repeated neighbors"))

    rev = np.sort(dst * n + src)
    fwd = np.sort(keys)
    if not np.array_equal(fwd, rev):
        missing = np.setdiff1d(fwd, rev)
        for key in missing[:1000]:
            u, v = divmod(int(key), n)
            out.append(Violation("asymmetric", f"{u}->{v} present but {v}->{u} missing"))

    part = graph.part_of
    intra = (part[src] == part[dst]) & (src != dst)
    if np.any(intra):
        lo = np.minimum(src[intra], dst[intra])
        hi = np.maximum(src[intra], dst[intra])
        for key in np.unique(lo * n + hi)[:1000]:
            u, v = divmod(int(key), n)
            out.append(Violation("intra-part edge", f"{{{u}, {v}}} inside part {int(part[u])}"))

    if len(graph.degree) != n:
        out.append(Violation("degree mismatch", "degree vector has wrong length"))
    else:
        for x in np.flatnonzero(graph.degree != counts)[:1000]:
            out.append(Violation(
                "degree mismatch",
                f"vertex {int(x)} stores degree {int(graph.degree[x])} but has {int(counts[x])} neighbors",
            ))
    return out

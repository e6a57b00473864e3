"""Degree profiles and the groupie predicate, in exact integer arithmetic.

A vertex ``x`` with degree ``d`` and neighbor-degree sum ``S`` is a groupie
when ``d`` exceeds the mean neighbor degree ``S / d``. We compare ``d * d``
with ``S`` instead, so ties are decided exactly. Isolated vertices are never
groupies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_convention
from .model import MultipartiteGraph


@dataclass(frozen=True, eq=False)
class DegreeProfile:
    d: np.ndarray
    S: np.ndarray

    def __len__(self):
        return len(self.d)


def degree_profile(graph: MultipartiteGraph) -> DegreeProfile:
    """Degrees and neighbor-degree sums in O(n + |E|)."""
    d = np.asarray(graph.degree, dtype=np.int64)
    contrib = d[graph.indices]
    # prefix sums over the CSR rows give exact per-row totals, empty rows included
    csum = np.zeros(len(contrib) + 1, dtype=np.int64)
    np.cumsum(contrib, out=csum[1:])
    S = csum[graph.indptr[1:]] - csum[graph.indptr[:-1]]
    d = d.copy()
    d.setflags(write=False)
    S.setflags(write=False)
    return DegreeProfile(d, S)


def is_groupie(d_x: int, S_x: int, convention: str = "strict") -> bool:
    convention = check_convention(convention)
    d_x, S_x = int(d_x), int(S_x)
    if d_x <= 0:
        return False
    if convention == "strict":
        return d_x * d_x > S_x
    return d_x * d_x >= S_x


def groupie_mask(profile: DegreeProfile, convention: str = "strict") -> np.ndarray:
    """Vectorized :func:`is_groupie` over every vertex."""
    convention = check_convention(convention)
    d, S = profile.d, profile.S
    sq = d * d
    hit = sq > S if convention == "strict" else sq >= S
    return hit & (d > 0)


def _per_part(mask: np.ndarray, part_sizes) -> tuple[int, ...]:
    bounds = np.concatenate([[0], np.cumsum(part_sizes)])
    csum = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])
    return tuple(int(x) for x in csum[bounds[1:]] - csum[bounds[:-1]])


@dataclass(frozen=True)
class GroupieReport:
    part_sizes: tuple[int, ...]
    counts: tuple[int, ...]
    convention: str

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(c / s for c, s in zip(self.counts, self.part_sizes))

    @property
    def total_fraction(self) -> float:
        return self.total / sum(self.part_sizes)


def groupie_report(graph: MultipartiteGraph, profile: DegreeProfile | None = None,
                   convention: str = "strict") -> GroupieReport:
    """Count groupies in every part."""
    convention = check_convention(convention)
    if profile is None:
        profile = degree_profile(graph)
    mask = groupie_mask(profile, convention)
    return GroupieReport(graph.part_sizes, _per_part(mask, graph.part_sizes), convention)


@dataclass(frozen=True)
class ThresholdCounts:
    """Per-part counts of vertices with degree ``> upper`` and ``< lower``."""

    part_sizes: tuple[int, ...]
    above: tuple[int, ...]
    below: tuple[int, ...]
    upper: float
    lower: float


def degree_cutoffs(upper: float, lower: float) -> tuple[float, float]:
    """Integer cutoffs equivalent to ``d > upper`` and ``d < lower`` for integer ``d``.

    ``d > upper`` holds iff ``d >= floor(upper) + 1``; ``d < lower`` holds iff
    ``d <= ceil(lower) - 1``. Infinite thresholds pass through unchanged.
    """
    hi = math.floor(upper) + 1 if math.isfinite(upper) else upper
    lo = math.ceil(lower) - 1 if math.isfinite(lower) else lower
    return hi, lo


def threshold_counts(graph: MultipartiteGraph, profile: DegreeProfile | None = None,
                     upper: float = math.inf, lower: float = -math.inf) -> ThresholdCounts:
    upper, lower = float(upper), float(lower)
    if math.isnan(upper) or math.isnan(lower):
        raise ValueError("thresholds must not be NaN")
    if lower > upper:
        raise ValueError(f"lower threshold {lower} exceeds upper threshold {upper}")
    if profile is None:
        profile = degree_profile(graph)
    hi, lo = degree_cutoffs(upper, lower)
    d = profile.d
    above = _per_part(d >= hi, graph.part_sizes)
    below = _per_part(d <= lo, graph.part_sizes)
    return ThresholdCounts(graph.part_sizes, above, below, upper, lower)


def structural_identities(graph: MultipartiteGraph, profile: DegreeProfile | None = None) -> dict[str, bool]:
    """Handshake and neighbor-sum identities, evaluated exactly."""
    if profile is None:
        profile = degree_profile(graph)
    d = profile.d
    return {
        "handshake": int(d.sum()) == 2 * graph.num_edges,
        "neighbor_sum": int(profile.S.sum()) == int((d * d).sum()),
    }

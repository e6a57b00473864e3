"""Input checking shared by the public API and the estimator wrappers."""

from __future__ import annotations

import math
import numbers
from typing import Iterable, Sequence

import numpy as np

CONVENTIONS = ("strict", "nonstrict")

_CONVENTION_ALIASES = {
    "strict": "strict",
    "nonstrict": "nonstrict",
    "non-strict": "nonstrict",
    "non_strict": "nonstrict",
}


def check_convention(convention: str) -> str:
    """Normalize a groupie convention name to ``"strict"`` or ``"nonstrict"``."""
    try:
        return _CONVENTION_ALIASES[str(convention).lower()]
    except KeyError:
        raise ValueError(
            f"convention must be one of {CONVENTIONS}, got {convention!r}"
        ) from None


def check_probability(p, name: str = "p") -> float:
    if isinstance(p, bool) or not isinstance(p, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(p).__name__}")
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_part_sizes(part_sizes: Iterable[int]) -> tuple[int, ...]:
    sizes = []
    for s in part_sizes:
        if isinstance(s, bool) or not isinstance(s, numbers.Integral):
            if isinstance(s, float) and s.is_integer():
                s = int(s)
            else:
                raise TypeError(f"part sizes must be integers, got {s!r}")
        sizes.append(int(s))
    if len(sizes) < 2:
        raise ValueError(f"need at least 2 parts, got {len(sizes)}")
    bad = [s for s in sizes if s < 1]
    if bad:
        raise ValueError(f"every part needs at least one vertex, got sizes {sizes}")
    return tuple(sizes)


def check_edge_prob(edge_prob, k: int) -> np.ndarray:
    """Validate a k x k cross-part probability matrix and return a read-only copy."""
    mat = np.array(edge_prob, dtype=np.float64)
    if mat.shape != (k, k):
        raise ValueError(f"edge_prob must have shape ({k}, {k}), got {mat.shape}")
    if not np.all(np.isfinite(mat)) or mat.min() < 0.0 or mat.max() > 1.0:
        raise ValueError("edge_prob entries must lie in [0, 1]")
    if not np.array_equal(mat, mat.T):
        raise ValueError("edge_prob must be symmetric")
    if np.any(np.diag(mat) != 0.0):
        raise ValueError("edge_prob diagonal must be exactly 0 (no intra-part edges)")
    mat.setflags(write=False)
    return mat


def check_count(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(root) -> int:
    if isinstance(root, bool) or not isinstance(root, numbers.Integral):
        raise TypeError(f"seed must be an integer, got {root!r}")
    if not (0 <= root < 2**64):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {root}")
    return int(root)


def check_positive_real(value, name: str, allow_zero: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if math.isnan(value) or value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'>= 0' if allow_zero else '> 0'}, got {value}")
    return value


def sizes_from_fractions(fractions: Sequence[float], n: int) -> tuple[int, ...]:
    """Resolve part fractions to integer sizes summing to ``n`` (largest remainder)."""
    n = check_count(n, "n")
    fr = [float(f) for f in fractions]
    if any(f <= 0 for f in fr):
        raise ValueError("fractions must be positive")
    total = math.fsum(fr)
    quotas = [f / total * n for f in fr]
    sizes = [math.floor(q) for q in quotas]
    short = n - sum(sizes)
    # ties go to the earlier part so the result is deterministic
    order = sorted(range(len(fr)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:short]:
        sizes[i] += 1
    return check_part_sizes(sizes)

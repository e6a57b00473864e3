"""Closed-form quantities: binomial tails, Hoeffding bounds, the concentration
window for per-part groupie counts, and a first-moment predictor of the
limiting groupie fraction of each part.

Where the published derivation and the sampling model disagree (the degree
law of a part-1 vertex, the multiplier in the expected above-threshold
count), both numbers are returned side by side and labelled ``paper_*`` and
``model_*``. Neither is silently preferred.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb

from scipy import stats

from ._validation import check_positive_real
from .model import PartitionSpec

# exact rational tails for q = 1/2 up to this many trials
EXACT_TAIL_MAX_TRIALS = 1024


def rational(q) -> Fraction:
    """Exact rational for a probability, reading floats by their shortest decimal form."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(repr(float(q)))


def _row_probability(spec: PartitionSpec, i: int) -> float:
    row = [float(spec.edge_prob[i, j]) for j in range(spec.k) if j != i]
    if any(q != row[0] for q in row):
        raise ValueError(f"part {i} has unequal edge probabilities; its degree is not binomial")
    return row[0]


def _require_uniform(spec: PartitionSpec) -> float:
    p = spec.uniform_p
    if p is None:
        raise ValueError("this quantity is defined for uniform cross-part probability only")
    return p


def _require_tripartite(spec: PartitionSpec) -> None:
    if spec.k != 3:
        raise ValueError(f"defined for tripartite specs only, got k={spec.k}")


def expected_degree(spec: PartitionSpec, part: int) -> float:
    """Mean degree of a vertex in ``part``: sum over other parts of ``s_j * q_ij``.

    Equals ``(n - s_i) * p`` for a uniform spec.
    """
    return float(sum(rational(spec.edge_prob[part, j]) * spec.part_sizes[j]
                     for j in range(spec.k) if j != part))


@dataclass(frozen=True)
class DegreeLaw:
    paper_trials: int
    model_trials: int
    q: float


def paper_degree_law(spec: PartitionSpec) -> DegreeLaw:
    """Binomial degree law of a part-1 vertex: as written in the proof, and as the model implies.

    The proof uses ``Bin((1-a-b)n, p)``, i.e. only the third part as potential
    neighbors; the model gives ``Bin((1-a)n, p)``.
    """
    _require_tripartite(spec)
    p = _require_uniform(spec)
    s1, s2, s3 = spec.part_sizes
    return DegreeLaw(paper_trials=s3, model_trials=s2 + s3, q=p)


def paper_conditional_mean_S(d_x: int, a_plus_b, n: int) -> float:
    """Literal ``d_x * ((a+b) n + 1) / 2`` for the mean neighbor-degree sum at p = 1/2."""
    if d_x < 0:
        raise ValueError("d_x must be non-negative")
    return float(d_x * (rational(a_plus_b) * n + 1) / 2)


def hoeffding_tail_bound(m: int, t: float, two_sided: bool = True) -> float:
    """Hoeffding bound on ``P(|Bin(m, 1/2) - m/2| >= t)``, capped at 1.

    ``two_sided=False`` drops the factor 2 and bounds a single tail.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    t = check_positive_real(t, "t", allow_zero=True)
    factor = 2.0 if two_sided else 1.0
    return min(1.0, factor * math.exp(-2.0 * t * t / m))


def binomial_tail_fraction(m: int, q, k: int) -> Fraction:
    """Exact ``P(Bin(m, q) >= k)`` as a fraction."""
    q = rational(q)
    if k <= 0:
        return Fraction(1)
    if k > m:
        return Fraction(0)
    if q == Fraction(1, 2):
        return Fraction(sum(comb(m, j) for j in range(k, m + 1)), 2**m)
    r = 1 - q
    return sum((comb(m, j) * q**j * r ** (m - j) for j in range(k, m + 1)), Fraction(0))


def binomial_tail_exact(m: int, q: float, k: int) -> float:
    """``P(Bin(m, q) >= k)``.

    Rational arithmetic for ``q = 1/2`` and ``m <= 1024``; otherwise scipy's
    regularized incomplete beta, which is accurate far below 1e-12.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if m < 0:
        raise ValueError("m must be non-negative")
    if k <= 0:
        return 1.0
    if k > m:
        return 0.0
    if q == 0.5 and m <= EXACT_TAIL_MAX_TRIALS:
        return float(binomial_tail_fraction(m, Fraction(1, 2), k))
    return float(stats.binom.sf(k - 1, m, q))


def binomial_two_sided_tail(m: int, t) -> Fraction:
    """Exact ``P(|Bin(m, 1/2) - m/2| >= t)``."""
    t2 = 2 * rational(t)
    hits = sum(comb(m, j) for j in range(m + 1) if abs(2 * j - m) >= t2)
    return Fraction(hits, 2**m)


@dataclass(frozen=True)
class NplusExpectation:
    model: float
    paper_literal: float
    tail: float
    trials: int
    cutoff: int


def expected_Nplus(spec: PartitionSpec, part: int, threshold: float) -> NplusExpectation:
    """Expected number of vertices of ``part`` with degree strictly above ``threshold``.

    ``model`` multiplies the exact tail by the part size; ``paper_literal`` by
    ``n / 2`` as in the published expectation.
    """
    q = _row_probability(spec, part)
    m = spec.n - spec.part_sizes[part]
    cutoff = math.floor(threshold) + 1 if math.isfinite(threshold) else (
        m + 1 if threshold > 0 else 0)
    tail = binomial_tail_exact(m, q, cutoff)
    return NplusExpectation(
        model=spec.part_sizes[part] * tail,
        paper_literal=spec.n / 2 * tail,
        tail=tail,
        trials=m,
        cutoff=cutoff,
    )


def default_omega(n: int) -> float:
    return math.log(n)


@dataclass(frozen=True)
class ConcentrationWindow:
    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width >= 0:
            raise ValueError("half_width must be non-negative")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, value) -> bool:
        return self.lower <= value <= self.upper


def concentration_window(spec: PartitionSpec, omega: float | None = None) -> ConcentrationWindow:
    """The literal window ``(a+b) n / 2 +- omega * sqrt(n)`` shared by all three parts."""
    _require_tripartite(spec)
    n = spec.n
    omega = default_omega(n) if omega is None else check_positive_real(omega, "omega", allow_zero=True)
    s1, s2, _ = spec.part_sizes
    return ConcentrationWindow(center=(s1 + s2) / 2, half_width=omega * math.sqrt(n))


def centered_window(center: float, n: int, omega: float | None = None) -> ConcentrationWindow:
    """Window of the same half-width around an arbitrary (e.g. empirical) center."""
    omega = default_omega(n) if omega is None else omega
    return ConcentrationWindow(center=float(center), half_width=omega * math.sqrt(n))


@dataclass(frozen=True)
class PartPrediction:
    mean_degree: float
    mean_neighbor_degree: float
    fraction: float


def heuristic_prediction(spec: PartitionSpec) -> list[PartPrediction]:
    """First-moment guess of each part's limiting groupie fraction.

    A vertex of part i has mean degree mu_i; a uniformly chosen neighbor lies
    in part j with weight ``s_j * q_ij`` and has mean degree mu_j. The part is
    predicted all-groupie (1) if mu_i beats the weighted neighbor mean nu_i,
    none (0) if it loses, and half on a tie. Comparisons are exact rationals.
    """
    sizes = spec.part_sizes
    q = [[rational(spec.edge_prob[i, j]) for j in range(spec.k)] for i in range(spec.k)]
    mu = [sum(q[i][j] * sizes[j] for j in range(spec.k)) for i in range(spec.k)]
    out = []
    for i in range(spec.k):
        weight = sum(sizes[j] * q[i][j] for j in range(spec.k))
        nu = (sum(sizes[j] * q[i][j] * mu[j] for j in range(spec.k)) / weight) if weight else Fraction(0)
        frac = 1.0 if mu[i] > nu else 0.0 if mu[i] < nu else 0.5
        out.append(PartPrediction(float(mu[i]), float(nu), frac))
    return out


def theory_table(spec: PartitionSpec, omega: float | None = None) -> dict:
    """Everything the ``theory`` subcommand prints, as plain data."""
    n = spec.n
    omega = default_omega(n) if omega is None else omega
    table = {
        "n": n,
        "part_sizes": list(spec.part_sizes),
        "omega": omega,
        "expected_degree": [expected_degree(spec, i) for i in range(spec.k)],
        "predictions": [asdict(p) for p in heuristic_prediction(spec)],
    }
    if spec.k == 3 and spec.uniform_p is not None:
        law = paper_degree_law(spec)
        window = concentration_window(spec, omega)
        table["degree_law_part1"] = {
            "paper_literal": {"trials": law.paper_trials, "q": law.q},
            "model_implied": {"trials": law.model_trials, "q": law.q},
        }
        table["window"] = {
            "center": window.center,
            "half_width": window.half_width,
            "lower": window.lower,
            "upper": window.upper,
        }
    return table

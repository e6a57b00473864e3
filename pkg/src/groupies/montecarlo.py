"""Deterministic Monte Carlo campaigns over sampled multipartite graphs.

Trial ``t`` draws its graph from ``seed.child("trial", t)``, so every trial
is reproducible on its own and the campaign output does not depend on how
trials are spread over threads. Summaries are computed from the per-trial
arrays after all trials are in place.
"""

from __future__ import annotations

import ast
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import check_convention, check_count
from .groupie import degree_cutoffs, degree_profile
from .model import DENSE_FRACTION, PartitionSpec, cross_pair_list, dense_edge_masks, sample
from .oracle import MAX_PAIRS, UndefinedConditionalError, exact_conditional_mean_S, free_pair_count
from .rng import Seed, as_seed
from .theory import (
    ConcentrationWindow,
    centered_window,
    concentration_window,
    default_omega,
    expected_degree,
    expected_Nplus,
    heuristic_prediction,
    paper_conditional_mean_S,
    paper_degree_law,
)

# specs this small are evaluated many trials at a time on dense adjacency
BATCH_MAX_N = 64
BATCH_TRIALS = 2048
# trials per scheduling unit for full-size graphs
TRIAL_CHUNK = 8
LOW_CONFIDENCE_SAMPLES = 30
Z95 = 1.96


def trial_seed(seed: Seed, t: int) -> Seed:
    return seed.child("trial", t)


# --- threshold formulas --------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "ln": math.log, "exp": math.exp}


def threshold_names(spec: PartitionSpec) -> dict[str, float]:
    return {
        "n": float(spec.n),
        "p": float("nan") if spec.uniform_p is None else spec.uniform_p,
        "mu": expected_degree(spec, 0),
    }


def evaluate_threshold(expr, names: dict[str, float]) -> float | None:
    """Evaluate a threshold given as a number or an arithmetic formula.

    Formulas may use the variables in ``names`` (typically ``n``, ``p`` and
    ``mu``, the mean degree of part 1), ``inf``, and
    ``sqrt``/``log``/``ln``/``exp``, e.g. ``"mu + 50*sqrt(log(n))"``.
    """
    if expr is None:
        return None
    if isinstance(expr, (int, float)):
        return float(expr)
    names = {**names, "inf": math.inf}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return names[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        if isinstance(node, ast.Name):
            raise ValueError(f"unknown name {node.id!r} in threshold formula {expr!r}")
        raise ValueError(f"unsupported element in threshold formula {expr!r}")

    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError:
        raise ValueError(f"cannot parse threshold formula {expr!r}") from None
    value = float(ev(tree))
    if math.isnan(value):
        raise ValueError(f"threshold formula {expr!r} evaluates to NaN")
    return value


# --- configuration and results ---------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    spec: PartitionSpec
    trials: int = 100
    seed: Seed = field(default_factory=Seed)
    convention: str = "strict"
    omega: float | None = None
    upper: float | str | None = None
    lower: float | str | None = None

    def __post_init__(self):
        object.__setattr__(self, "trials", check_count(self.trials, "trials"))
        object.__setattr__(self, "seed", as_seed(self.seed))
        object.__setattr__(self, "convention", check_convention(self.convention))
        if self.omega is not None and not self.omega >= 0:
            raise ValueError("omega must be non-negative")

    @property
    def omega_value(self) -> float:
        return default_omega(self.spec.n) if self.omega is None else float(self.omega)

    def thresholds(self) -> tuple[float, float]:
        names = threshold_names(self.spec)
        upper = evaluate_threshold(self.upper, names)
        lower = evaluate_threshold(self.lower, names)
        upper = math.inf if upper is None else upper
        lower = -math.inf if lower is None else lower
        if lower > upper:
            raise ValueError(f"lower threshold {lower} exceeds upper threshold {upper}")
        return upper, lower

    def echo(self) -> dict:
        upper, lower = self.thresholds()
        return {
            "part_sizes": list(self.spec.part_sizes),
            "edge_prob": self.spec.edge_prob.tolist(),
            "n": self.spec.n,
            "trials": self.trials,
            "seed": self.seed.root,
            "convention": self.convention,
            "omega": self.omega_value,
            "upper": _finite_or_none(upper),
            "lower": _finite_or_none(lower),
        }


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Per-trial records of a campaign; every summary is derived from them."""

    config: ExperimentConfig
    N: np.ndarray            # (T,)
    N_parts: np.ndarray      # (T, k)
    above: np.ndarray        # (T, k) vertices with degree > upper
    below: np.ndarray        # (T, k) vertices with degree < lower
    mean_degree: np.ndarray  # (T, k)

    @property
    def trials(self) -> int:
        return len(self.N)

    def paper_window(self) -> ConcentrationWindow | None:
        if self.config.spec.k != 3:
            return None
        return concentration_window(self.config.spec, self.config.omega_value)

    def empirical_window(self, part: int) -> ConcentrationWindow:
        center = float(np.median(self.N_parts[:, part]))
        return centered_window(center, self.config.spec.n, self.config.omega_value)

    def summary(self) -> dict:
        spec = self.config.spec
        T = self.trials
        sizes = spec.part_sizes
        parts = []
        for i, s in enumerate(sizes):
            counts = self.N_parts[:, i]
            frac = counts / s
            fmean = float(frac.mean())
            if T > 1:
                half = Z95 * float(frac.std(ddof=1)) / math.sqrt(T)
                ci = [max(0.0, fmean - half), min(1.0, fmean + half)]
            else:
                ci = None
            parts.append({
                "part": i,
                "size": s,
                **_moments(counts),
                "std": float(counts.std(ddof=1)) if T > 1 else None,
                "fraction_mean": fmean,
                "fraction_ci95": ci,
                "mean_degree": float(self.mean_degree[:, i].mean()),
                "expected_degree": expected_degree(spec, i),
                "above_mean": float(self.above[:, i].mean()),
                "below_mean": float(self.below[:, i].mean()),
            })
        paper = self.paper_window()
        coverage = {
            "paper_literal": None if paper is None else {
                "center": paper.center,
                "half_width": paper.half_width,
                "per_part": [window_coverage(self, paper, i) for i in range(spec.k)],
                "all_parts": joint_coverage(self, [paper] * spec.k),
            },
            "empirical": {
                "centers": [self.empirical_window(i).center for i in range(spec.k)],
                "half_width": self.empirical_window(0).half_width,
                "per_part": [window_coverage(self, self.empirical_window(i), i) for i in range(spec.k)],
                "all_parts": joint_coverage(self, [self.empirical_window(i) for i in range(spec.k)]),
            },
        }
        out = {
            "config": self.config.echo(),
            "omega": self.config.omega_value,
            "N": _moments(self.N),
            "N_fraction_mean": float(self.N.mean()) / spec.n,
            "parts": parts,
            "coverage": coverage,
            "heuristic_predictions": [p.__dict__ for p in heuristic_prediction(spec)],
        }
        if spec.k == 3 and spec.uniform_p is not None:
            law = paper_degree_law(spec)
            out["degree_law_part1"] = {
                "paper_literal": {"trials": law.paper_trials, "q": law.q, "mean": law.paper_trials * law.q},
                "model_implied": {"trials": law.model_trials, "q": law.q, "mean": law.model_trials * law.q},
                "empirical_mean": float(self.mean_degree[:, 0].mean()),
            }
        return out


def _moments(x: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(x)),
        "variance": float(np.var(x, ddof=1)) if len(x) > 1 else None,
        "min": int(np.min(x)),
        "max": int(np.max(x)),
    }


def window_coverage(result: ExperimentResult, window: ConcentrationWindow, part: int) -> float:
    """Fraction of trials whose N(B_part) lies inside the closed window."""
    counts = result.N_parts[:, part]
    return float(np.mean((counts >= window.lower) & (counts <= window.upper)))


def joint_coverage(result: ExperimentResult, windows: list[ConcentrationWindow]) -> float:
    """Fraction of trials where every part's count lies in its window at once."""
    ok = np.ones(result.trials, dtype=bool)
    for i, w in enumerate(windows):
        c = result.N_parts[:, i]
        ok &= (c >= w.lower) & (c <= w.upper)
    return float(ok.mean())


# --- trial evaluation ------------------------------------------------------------

def _batchable(spec: PartitionSpec) -> bool:
    return spec.n <= BATCH_MAX_N and all(q == 0.0 or q >= DENSE_FRACTION for *_, q in spec.blocks())


def _batch_profiles(spec: PartitionSpec, seeds: list[Seed]) -> tuple[np.ndarray, np.ndarray]:
    """Degrees and neighbor sums, shape (len(seeds), n), without building graphs.

    Uses the same pair draws as :func:`sample`, so the numbers are identical.
    """
    pairs = cross_pair_list(spec)
    n = spec.n
    inc_u = np.zeros((len(pairs), n))
    inc_v = np.zeros((len(pairs), n))
    inc_u[np.arange(len(pairs)), pairs[:, 0]] = 1.0
    inc_v[np.arange(len(pairs)), pairs[:, 1]] = 1.0
    E = dense_edge_masks(spec, seeds).astype(np.float64)
    # small integers: float matrix products are exact here
    deg = E @ (inc_u + inc_v)
    S = (E * deg[:, pairs[:, 1]]) @ inc_u + (E * deg[:, pairs[:, 0]]) @ inc_v
    return np.rint(deg).astype(np.int64), np.rint(S).astype(np.int64)


def _stats_from_profiles(spec, deg, S, convention, upper, lower):
    sq = deg * deg
    hit = ((sq > S) if convention == "strict" else (sq >= S)) & (deg > 0)
    hi, lo = degree_cutoffs(upper, lower)
    bounds = np.concatenate([[0], np.cumsum(spec.part_sizes)])

    def per_part(mask):
        c = np.concatenate([np.zeros((mask.shape[0], 1), dtype=np.int64),
                            np.cumsum(mask, axis=1, dtype=np.int64)], axis=1)
        return c[:, bounds[1:]] - c[:, bounds[:-1]]

    parts = per_part(hit)
    dsum = per_part(deg)
    return (parts.sum(axis=1), parts, per_part(deg >= hi), per_part(deg <= lo),
            dsum / np.array(spec.part_sizes, dtype=np.float64))


def _run_chunk(spec, seeds, convention, upper, lower):
    if _batchable(spec):
        deg, S = _batch_profiles(spec, seeds)
    else:
        profs = [degree_profile(sample(spec, s)) for s in seeds]
        deg = np.stack([p.d for p in profs])
        S = np.stack([p.S for p in profs])
    return _stats_from_profiles(spec, deg, S, convention, upper, lower)


def _map_chunks(fn, chunks, threads):
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, chunks))
    return [fn(c) for c in chunks]


def run(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run every trial of a campaign and collect the per-trial records."""
    threads = check_count(threads, "threads")
    spec = config.spec
    upper, lower = config.thresholds()
    size = BATCH_TRIALS if _batchable(spec) else TRIAL_CHUNK
    T = config.trials
    chunks = [range(lo, min(T, lo + size)) for lo in range(0, T, size)]

    def work(idx):
        seeds = [trial_seed(config.seed, t) for t in idx]
        return _run_chunk(spec, seeds, config.convention, upper, lower)

    results = _map_chunks(work, chunks, threads)
    cols = [np.concatenate([r[c] for r in results]) for c in range(5)]
    for c in cols:
        c.setflags(write=False)
    return ExperimentResult(config, *cols)


# --- sweeps and probes -----------------------------------------------------------

def nplus_threshold(spec: PartitionSpec, offset_const: float = 50.0) -> float:
    """Mean degree of part 1 plus ``offset_const * sqrt(ln n)``."""
    return expected_degree(spec, 0) + offset_const * math.sqrt(math.log(spec.n))


@dataclass(frozen=True)
class SweepResult:
    rows: list[dict]
    slope: float | None
    intercept: float | None

    def ratio_spread(self) -> float:
        """max / min of Var(N+)/n across rows; nan when any ratio is absent or zero."""
        ratios = [r["var_ratio"] for r in self.rows]
        if len(ratios) < 2 or any(r is None for r in ratios) or min(ratios) <= 0:
            return math.nan
        return max(ratios) / min(ratios)


def scaling_sweep(specs: list[PartitionSpec], trials: int, seed=0, convention: str = "strict",
                  offset_const: float = 50.0, threads: int = 1) -> SweepResult:
    """Groupie counts and the above-threshold count of part 1 across growing n.

    The threshold for each size is ``mean degree of part 1 + offset_const * sqrt(ln n)``.
    """
    if len(specs) < 2:
        raise ValueError("a sweep needs at least two specs")
    seed = as_seed(seed)
    rows = []
    for idx, spec in enumerate(specs):
        thr = nplus_threshold(spec, offset_const)
        cfg = ExperimentConfig(spec, trials, seed.child("sweep", idx), convention, upper=thr)
        res = run(cfg, threads=threads)
        n = spec.n
        nplus = res.above[:, 0]
        var = float(np.var(nplus, ddof=1)) if trials > 1 else None
        exp = expected_Nplus(spec, 0, thr)
        rows.append({
            "n": n,
            "part_sizes": list(spec.part_sizes),
            "threshold": thr,
            "part_means": [float(x) for x in res.N_parts.mean(axis=0)],
            "part_variances": [float(x) for x in res.N_parts.var(axis=0, ddof=1)] if trials > 1 else None,
            "part_fractions": [float(x) for x in (res.N_parts.mean(axis=0) / np.array(spec.part_sizes))],
            "nplus_mean": float(nplus.mean()),
            "nplus_variance": var,
            "nplus_expected": exp.model,
            "nplus_expected_paper_literal": exp.paper_literal,
            "var_ratio": None if var is None else var / n,
            # C1 read off EN+ = n/3 - C1 sqrt(n ln n), as published
            "c1_paper_literal": (n / 3 - float(nplus.mean())) / math.sqrt(n * math.log(n)),
        })
    pts = [(r["n"], r["nplus_variance"]) for r in rows if r["nplus_variance"] is not None]
    if len(pts) >= 2:
        slope, intercept = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)
        slope, intercept = float(slope), float(intercept)
    else:
        slope = intercept = None
    return SweepResult(rows, slope, intercept)


@dataclass(frozen=True)
class ProbeRow:
    degree: int
    samples: int
    mean_S: float
    paper_literal: float | None
    exact: Fraction | None
    rel_dev_paper: float | None
    rel_dev_exact: float | None
    low_confidence: bool


def conditional_S_probe(spec: PartitionSpec, part: int, trials: int, seed=0,
                        threads: int = 1) -> list[ProbeRow]:
    """Empirical ``E[S_x | d_x]`` for the first vertex of ``part``, binned by ``d_x``.

    Each bin is set beside the published formula ``d ((a+b) n + 1) / 2`` (tripartite
    specs) and, when the spec is small enough, the exact enumerated value.
    """
    trials = check_count(trials, "trials")
    seed = as_seed(seed)
    x = spec.starts[part]
    size = BATCH_TRIALS if _batchable(spec) else TRIAL_CHUNK
    chunks = [range(lo, min(trials, lo + size)) for lo in range(0, trials, size)]

    def work(idx):
        seeds = [trial_seed(seed, t) for t in idx]
        if _batchable(spec):
            deg, S = _batch_profiles(spec, seeds)
            return deg[:, x], S[:, x]
        profs = [degree_profile(sample(spec, s)) for s in seeds]
        return np.array([p.d[x] for p in profs]), np.array([p.S[x] for p in profs])

    res = _map_chunks(work, chunks, threads)
    d = np.concatenate([r[0] for r in res])
    S = np.concatenate([r[1] for r in res])
    a_plus_b = Fraction(spec.part_sizes[0] + spec.part_sizes[1], spec.n) if spec.k == 3 else None
    use_oracle = free_pair_count(spec) <= MAX_PAIRS
    rows = []
    for deg in np.unique(d):
        sel = S[d == deg]
        mean = float(sel.mean())
        paper = None if a_plus_b is None else paper_conditional_mean_S(int(deg), a_plus_b, spec.n)
        exact = None
        if use_oracle:
            try:
                exact = exact_conditional_mean_S(spec, part, int(deg), threads=threads).mean
            except UndefinedConditionalError:
                pass
        rows.append(ProbeRow(
            degree=int(deg),
            samples=int(len(sel)),
            mean_S=mean,
            paper_literal=paper,
            exact=exact,
            rel_dev_paper=_rel(mean, paper),
            rel_dev_exact=None if exact is None else _rel(mean, float(exact)),
            low_confidence=len(sel) < LOW_CONFIDENCE_SAMPLES,
        ))
    return rows


def _rel(value: float, ref: float | None) -> float | None:
    if ref is None:
        return None
    if ref == 0:
        return 0.0 if value == 0 else math.inf
    return (value - ref) / ref

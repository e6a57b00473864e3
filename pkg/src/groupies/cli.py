"""Command-line entry point.

Exit status: 0 on success, 2 for invalid input (flags, specs, files), 1 for
any other failure. Randomized subcommands default to ``--seed 0``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from ._validation import check_count, check_positive_real, sizes_from_fractions
from .graphfile import GraphFormatError, format_graph, read_graph
from .groupie import degree_profile, groupie_report, threshold_counts
from .model import PartitionSpec, sample, uniform_spec
from .montecarlo import (
    ExperimentConfig,
    conditional_S_probe,
    evaluate_threshold,
    run,
    scaling_sweep,
    threshold_names,
)
from .oracle import MAX_PAIRS, exact_groupie_distribution, free_pair_count
from .rng import Seed
from .theory import theory_table

DEFAULT_SEED = 0

THRESHOLD_HELP = (
    "number or formula in n, p, mu (mean degree of part 1), e.g. 'mu+50*sqrt(log(n))'. "
    "A vertex counts as above when d > upper, i.e. d >= floor(upper)+1, and as below "
    "when d < lower, i.e. d <= ceil(lower)-1"
)


class UsageError(Exception):
    """Invalid command-line input; reported with exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(text: str) -> int:
    try:
        return Seed(int(text, 0)).root
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"seed must be an integer in [0, 2**64), got {text!r}") from None


def _add_spec_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("graph model")
    g.add_argument("--parts", type=_int_list, help="comma-separated absolute part sizes, e.g. 300,300,300")
    g.add_argument("--fractions", type=_float_list, help="part fractions, resolved with --n by largest remainder")
    g.add_argument("--n", type=int, help="total vertex count for --fractions")
    g.add_argument("--p", type=float, help="edge probability between any two parts")
    g.add_argument("--matrix", help="CSV file with the k x k cross-part probability matrix (zero diagonal)")
    p.set_defaults(_spec_required=required)


def _add_common(p: argparse.ArgumentParser, fmt_default: str, formats=("csv", "json", "text")) -> None:
    p.add_argument("--format", choices=formats, default=fmt_default)
    p.add_argument("--out", default="-", help="output path (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")


def _read_matrix(path: str, k: int) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"--matrix {path}: cannot read file ({exc.strerror})") from None
    try:
        mat = np.array([[float(x) for x in r] for r in rows])
    except ValueError:
        raise UsageError(f"--matrix {path}: entries must be numbers") from None
    if mat.shape != (k, k):
        raise UsageError(f"--matrix {path}: expected a {k}x{k} matrix, got shape {mat.shape}")
    if np.any(np.diag(mat) != 0):
        raise UsageError(f"--matrix {path}: diagonal must be zero (no intra-part edges)")
    return mat


def _spec(args) -> PartitionSpec | None:
    if args.parts is not None and args.fractions is not None:
        raise UsageError("give either --parts or --fractions, not both")
    if args.fractions is not None:
        if args.n is None:
            raise UsageError("--fractions requires --n")
        sizes = list(sizes_from_fractions(args.fractions, args.n))
    elif args.parts is not None:
        sizes = args.parts
    else:
        if args._spec_required:
            raise UsageError("missing --parts (or --fractions with --n)")
        return None
    if (args.p is None) == (args.matrix is None):
        raise UsageError("give exactly one of --p and --matrix")
    if args.matrix is not None:
        return PartitionSpec(tuple(sizes), _read_matrix(args.matrix, len(sizes)))
    return uniform_spec(sizes, args.p)


def _threshold(text, names: dict, flag: str):
    try:
        return evaluate_threshold(text, names)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _spec_echo(spec: PartitionSpec) -> dict:
    return {
        "part_sizes": list(spec.part_sizes),
        "n": spec.n,
        "edge_prob": spec.edge_prob.tolist(),
    }


def _echo_lines(echo: dict) -> str:
    return f"# config {json.dumps(echo, sort_keys=True)}\n"


def _f6(x) -> str:
    return "" if x is None else f"{float(x):.6f}"


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)


def _json(obj) -> str:
    def default(o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, sort_keys=True, default=default, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- subcommands ---------------------------------------------------------------


def cmd_sample(args) -> None:
    spec = _spec(args)
    graph = sample(spec, Seed(args.seed), threads=args.threads)
    echo = {"command": "sample", **_spec_echo(spec), "seed": args.seed}
    # the graph format is bit-exact, so the echo goes to stderr
    sys.stderr.write(_echo_lines(echo))
    _emit(args, format_graph(graph))


def report_rows(report, thresholds) -> list[list]:
    rows = []
    for i, s in enumerate(report.part_sizes):
        rows.append([i, s, report.counts[i], _f6(report.fractions[i]), thresholds.above[i], thresholds.below[i]])
    rows.append(["total", sum(report.part_sizes), report.total, _f6(report.total_fraction),
                 sum(thresholds.above), sum(thresholds.below)])
    return rows


def cmd_analyze(args) -> None:
    spec = _spec(args)
    if args.input is not None and spec is not None:
        raise UsageError("give either --in or a graph model, not both")
    if args.input is not None:
        graph = read_graph(args.input)
        echo = {"command": "analyze", "input": args.input, "part_sizes": list(graph.part_sizes)}
        names = {"n": float(graph.n)}
    elif spec is not None:
        graph = sample(spec, Seed(args.seed), threads=args.threads)
        echo = {"command": "analyze", **_spec_echo(spec), "seed": args.seed}
        names = threshold_names(spec)
    else:
        raise UsageError("analyze needs --in FILE or a graph model (--parts/--fractions with --p/--matrix)")
    upper = _threshold(args.upper, names, "--upper")
    lower = _threshold(args.lower, names, "--lower")
    upper = math.inf if upper is None else upper
    lower = -math.inf if lower is None else lower
    profile = degree_profile(graph)
    report = groupie_report(graph, profile, args.convention)
    thr = threshold_counts(graph, profile, upper, lower)
    echo.update(convention=report.convention,
                upper=upper if math.isfinite(upper) else None,
                lower=lower if math.isfinite(lower) else None)
    rows = report_rows(report, thr)
    header = ["part", "size", "groupies", "fraction", "above", "below"]
    if args.format == "csv":
        _emit(args, _echo_lines(echo) + _csv(header, rows))
    elif args.format == "json":
        _emit(args, _json({
            "config": echo,
            "parts": [dict(zip(header, [i, s, c, f, a, b])) for i, (s, c, f, a, b) in enumerate(
                zip(report.part_sizes, report.counts, report.fractions, thr.above, thr.below))],
            "total": {"size": graph.n, "groupies": report.total, "fraction": report.total_fraction,
                      "above": sum(thr.above), "below": sum(thr.below)},
            "edges": graph.num_edges,
        }))
    else:
        lines = [_echo_lines(echo).rstrip("\n")]
        lines.append(f"{'part':>6} {'size':>8} {'groupies':>9} {'fraction':>9} {'above':>7} {'below':>7}")
        for r in rows:
            lines.append(f"{r[0]!s:>6} {r[1]:>8} {r[2]:>9} {r[3]:>9} {r[4]:>7} {r[5]:>7}")
        _emit(args, "\n".join(lines) + "\n")


def cmd_exact(args) -> None:
    spec = _spec(args)
    dist = exact_groupie_distribution(spec, args.convention, threads=args.threads)
    echo = {"command": "exact", **_spec_echo(spec), "convention": dist.convention,
            "free_pairs": dist.free_pairs, "configurations": dist.configurations}
    laws = [("N", dist.total)] + [(f"N_B{i + 1}", law) for i, law in enumerate(dist.parts)]
    means = [("N", dist.mean, dist.variance)] + [
        (f"N_B{i + 1}", m, v) for i, (m, v) in enumerate(zip(dist.part_means, dist.part_variances))]
    if args.format == "csv":
        rows = [[q, v, _f6(p)] for q, law in laws for v, p in law]
        rows += [[f"E[{q}]", _f6(m), ""] for q, m, _ in means]
        rows += [[f"Var[{q}]", _f6(v), ""] for q, _, v in means]
        _emit(args, _echo_lines(echo) + _csv(["quantity", "value", "probability"], rows))
    elif args.format == "json":
        _emit(args, _json({
            "config": echo,
            "distributions": {q: [{"value": v, "probability": str(p), "probability_float": float(p)}
                                  for v, p in law] for q, law in laws},
            "expectations": {q: {"exact": str(m), "float": float(m)} for q, m, _ in means},
            "variances": {q: {"exact": str(v), "float": float(v)} for q, _, v in means},
        }))
    else:
        lines = [_echo_lines(echo).rstrip("\n")]
        for q, law in laws:
            lines.append(f"{q}: " + ", ".join(f"P({v})={p}" for v, p in law))
        for q, m, v in means:
            lines.append(f"E[{q}] = {m} ({float(m):.6f})   Var[{q}] = {v} ({float(v):.6f})")
        _emit(args, "\n".join(lines) + "\n")


def _flatten(prefix: str, obj, out: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def cmd_theory(args) -> None:
    spec = _spec(args)
    omega = None if args.omega is None else check_positive_real(args.omega, "--omega", allow_zero=True)
    table = theory_table(spec, omega)
    echo = {"command": "theory", **_spec_echo(spec), "omega": table["omega"]}
    if args.format == "json":
        _emit(args, _json({"config": echo, **table}))
        return
    pairs: list = []
    _flatten("", table, pairs)
    if args.format == "csv":
        _emit(args, _echo_lines(echo) + _csv(["key", "value"], [[k, json.dumps(v)] for k, v in pairs]))
    else:
        width = max(len(k) for k, _ in pairs)
        lines = [_echo_lines(echo).rstrip("\n")] + [f"{k:<{width}}  {json.dumps(v)}" for k, v in pairs]
        _emit(args, "\n".join(lines) + "\n")


def _default_trials(spec: PartitionSpec) -> int:
    return 100_000 if free_pair_count(spec) <= MAX_PAIRS else 100


def cmd_experiment(args) -> None:
    spec = _spec(args)
    trials = _default_trials(spec) if args.trials is None else check_count(args.trials, "--trials")
    names = threshold_names(spec)
    _threshold(args.upper, names, "--upper")
    _threshold(args.lower, names, "--lower")
    config = ExperimentConfig(spec, trials, Seed(args.seed), args.convention, args.omega,
                              upper=args.upper, lower=args.lower)
    result = run(config, threads=args.threads)
    summary = {"command": "experiment", **result.summary()}
    if args.summary:
        with open(args.summary, "w", newline="\n") as fh:
            fh.write(_json(summary))
    if args.format == "json":
        _emit(args, _json(summary))
        return
    k = spec.k
    header = ["trial", "N"] + [f"N_B{i + 1}" for i in range(k)]
    upper, lower = config.thresholds()
    cols = [result.N[:, None], result.N_parts]
    if math.isfinite(upper):
        header += [f"above_B{i + 1}" for i in range(k)]
        cols.append(result.above)
    if math.isfinite(lower):
        header += [f"below_B{i + 1}" for i in range(k)]
        cols.append(result.below)
    data = np.column_stack(cols).tolist()
    rows = [[t, *r] for t, r in enumerate(data)]
    if args.format == "csv":
        _emit(args, _echo_lines({"command": "experiment", **config.echo()}) + _csv(header, rows))
    else:
        s = summary
        lines = [_echo_lines({"command": "experiment", **config.echo()}).rstrip("\n"),
                 f"trials {trials}  mean N {s['N']['mean']:.6f}  mean N/n {s['N_fraction_mean']:.6f}"]
        for part in s["parts"]:
            ci = part["fraction_ci95"]
            ci_txt = f"[{ci[0]:.6f}, {ci[1]:.6f}]" if ci else "n/a"
            lines.append(f"part {part['part'] + 1}: size {part['size']}  mean {part['mean']:.6f}  "
                         f"fraction {part['fraction_mean']:.6f} ci95 {ci_txt}")
        cov = s["coverage"]
        if cov["paper_literal"] is not None:
            lines.append(f"paper-literal window coverage per part: {cov['paper_literal']['per_part']}")
        lines.append(f"empirical window coverage per part: {cov['empirical']['per_part']}")
        _emit(args, "\n".join(lines) + "\n")


def cmd_sweep(args) -> None:
    if args.fractions is None or args.sizes is None:
        raise UsageError("sweep needs --fractions and --sizes")
    if args.p is None:
        raise UsageError("sweep needs --p")
    if len(args.sizes) < 2:
        raise UsageError("--sizes needs at least two values")
    specs = [uniform_spec(sizes_from_fractions(args.fractions, n), args.p) for n in args.sizes]
    trials = check_count(args.trials, "--trials")
    res = scaling_sweep(specs, trials, Seed(args.seed), args.convention, args.offset_const, threads=args.threads)
    echo = {"command": "sweep", "fractions": args.fractions, "sizes": args.sizes, "p": args.p,
            "trials": trials, "seed": args.seed, "convention": args.convention,
            "offset_const": args.offset_const, "resolved_part_sizes": [list(s.part_sizes) for s in specs]}
    spread = res.ratio_spread()
    if args.format == "json":
        _emit(args, _json({"config": echo, "rows": res.rows, "slope": res.slope, "intercept": res.intercept,
                           "var_ratio_spread": None if math.isnan(spread) else spread}))
        return
    k = specs[0].k
    header = ["n", "threshold", "nplus_mean", "nplus_variance", "var_ratio", "nplus_expected"] + [
        f"fraction_B{i + 1}" for i in range(k)]
    rows = [[r["n"], _f6(r["threshold"]), _f6(r["nplus_mean"]), _f6(r["nplus_variance"]),
             _f6(r["var_ratio"]), _f6(r["nplus_expected"])] + [_f6(x) for x in r["part_fractions"]]
            for r in res.rows]
    text = _echo_lines(echo) + _csv(header, rows)
    text += f"# slope {_f6(res.slope)} var_ratio_spread {'' if math.isnan(spread) else _f6(spread)}\n"
    _emit(args, text)


def cmd_probe(args) -> None:
    spec = _spec(args)
    if not 0 <= args.part < spec.k:
        raise UsageError(f"--part must be in [0, {spec.k - 1}]")
    trials = check_count(args.trials, "--trials")
    rows = conditional_S_probe(spec, args.part, trials, Seed(args.seed), threads=args.threads)
    echo = {"command": "probe", **_spec_echo(spec), "part": args.part, "trials": trials, "seed": args.seed}
    header = ["degree", "samples", "mean_S", "paper_literal", "exact", "rel_dev_paper", "rel_dev_exact",
              "low_confidence"]
    if args.format == "json":
        _emit(args, _json({"config": echo, "rows": [r.__dict__ for r in rows]}))
        return
    out = [[r.degree, r.samples, _f6(r.mean_S), _f6(r.paper_literal),
            "" if r.exact is None else _f6(r.exact), _f6(r.rel_dev_paper), _f6(r.rel_dev_exact),
            int(r.low_confidence)] for r in rows]
    _emit(args, _echo_lines(echo) + _csv(header, out))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groupies", description="Groupie statistics for random multipartite graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample a graph and write it in multipartite-v1 format")
    _add_spec_args(p)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", default="-")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("analyze", help="groupie report for a graph file or an inline sample",
                       description="Thresholds: " + THRESHOLD_HELP)
    p.add_argument("--in", dest="input", help="graph file in multipartite-v1 format")
    _add_spec_args(p, required=False)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--convention", choices=("strict", "nonstrict"), default="strict")
    p.add_argument("--upper", help=THRESHOLD_HELP)
    p.add_argument("--lower", help=THRESHOLD_HELP)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("exact", help="exact groupie-count distribution by enumeration")
    _add_spec_args(p)
    p.add_argument("--convention", choices=("strict", "nonstrict"), default="strict")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("theory", help="closed-form predictions, degree laws and the concentration window")
    _add_spec_args(p)
    p.add_argument("--omega", type=float, help="window growth factor (default ln n)")
    _add_common(p, "text")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("experiment", help="Monte Carlo campaign",
                       description="Thresholds: " + THRESHOLD_HELP)
    _add_spec_args(p)
    p.add_argument("--trials", type=int, help="default 100000 for oracle-sized specs, else 100")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--convention", choices=("strict", "nonstrict"), default="strict")
    p.add_argument("--omega", type=float, help="window growth factor (default ln n)")
    p.add_argument("--upper", help=THRESHOLD_HELP)
    p.add_argument("--lower", help=THRESHOLD_HELP)
    p.add_argument("--summary", help="also write the JSON summary to this path")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", help="scaling study of groupie and above-threshold counts")
    p.add_argument("--fractions", type=_float_list, help="part fractions, e.g. 1,1,1")
    p.add_argument("--sizes", type=_int_list, help="total sizes n, e.g. 300,600,1200")
    p.add_argument("--p", type=float)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--convention", choices=("strict", "nonstrict"), default="strict")
    p.add_argument("--offset-const", type=float, default=50.0,
                   help="threshold = mean degree of part 1 + C*sqrt(ln n); default C=50")
    _add_common(p, "csv", formats=("csv", "json"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("probe", help="empirical E[S_x | d_x] against the closed form and the oracle")
    _add_spec_args(p)
    p.add_argument("--part", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    _add_common(p, "csv", formats=("csv", "json"))
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) is not None:
            check_count(args.threads, "--threads")
        args.func(args)
    except (UsageError, GraphFormatError, ValueError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"groupies: error: {msg}\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"groupies: runtime error: {type(exc).__name__}: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

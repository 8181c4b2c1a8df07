"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import alignment as dp
from .barycenter import AveragingProblem, frechet_mean, interpolate
from .classify import (
    GAMMA_GRID, BudgetExceeded, Deadline, accuracy, centroid_predict, fit_centroids,
    knn_predict, select_gamma,
)
from .costs import CostKind, build_cost
from .dataio import (
    ResultReport, fmt, load_series_csv, load_ucr, matrix_csv, report_csv, report_json, write_text,
)
from .divergences import DivergenceKind, Tag, divergence_grad_x, evaluate
from .errors import (
    DataError, DimensionError, InputError, NotDifferentiableError, NumericalError, ParameterError,
    SizeError,
)
from .oracle import oracle_stats
from .parallel import default_threads
from .verify import fourier_gauss_series, gram_min_eig

logger = logging.getLogger("tsdiv")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_kind(p, required=True):
    p.add_argument("--kind", required=required, choices=[t.value for t in Tag])
    p.add_argument("--cost", default="squared_euclidean",
                   help="squared_euclidean (sqeuclid), log_augmented or absolute")


def _add_output(p, default_format="csv"):
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=["csv", "json"], default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsdiv", description="Soft-DTW divergences between time series.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $TSDIV_THREADS or all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("divergence", help="value of a discrepancy or divergence between two series")
    _add_kind(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--x", required=True, help="CSV series, one time step per row")
    p.add_argument("--y", required=True)

    p = sub.add_parser("average", help="barycenter of a set of series")
    _add_kind(p)
    p.add_argument("--gamma", type=float)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--train", help="UCR dataset file")
    src.add_argument("--series", nargs="+", help="CSV series files")
    p.add_argument("--label", type=int, help="only average series of this class")
    p.add_argument("--pick", type=int, help="average a random subset of this size")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--length", type=int)
    p.add_argument("--init", choices=["auto", "euclidean_mean", "warm_start_biased"], default="auto")
    p.add_argument("--weights", choices=["auto", "uniform", "inverse_length"], default="auto")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", help="barycenter CSV (default: standard output)")
    p.add_argument("--trace", help="objective trace CSV (default: <out>.trace.csv)")

    p = sub.add_parser("interpolate", help="weighted average of two series")
    _add_kind(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--y1", required=True)
    p.add_argument("--y2", required=True)
    p.add_argument("--pi", type=float, required=True)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--length", type=int)
    p.add_argument("--out")
    p.add_argument("--trace")

    p = sub.add_parser("classify", help="nearest-neighbor / nearest-centroid accuracy")
    _add_kind(p)
    p.add_argument("--method", choices=["1nn", "knn", "centroid"], default="1nn")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", default=None,
                   help="'auto' for cross-validation over the grid, or a number")
    p.add_argument("--grid", type=float, nargs="+", default=list(GAMMA_GRID))
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--time-budget", type=float, help="seconds; NA is reported when exceeded")
    _add_output(p)

    p = sub.add_parser("gradcheck", help="compare analytic gradients with finite differences")
    p.add_argument("--kind", nargs="+", choices=[t.value for t in Tag if t is not Tag.DTW])
    p.add_argument("--cost", default="squared_euclidean")
    p.add_argument("--gamma", type=float)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-5)
    _add_output(p, "json")

    p = sub.add_parser("verify-gram", help="minimum eigenvalue of global alignment Gram matrices")
    p.add_argument("--cost", nargs="+", default=["log_augmented", "squared_euclidean"])
    p.add_argument("--gamma", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--train", help="use the series of a UCR file instead of random ones")
    p.add_argument("--n-series", type=int, default=50)
    p.add_argument("--length", type=int, default=30, help="maximum random series length")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--reps", type=int, default=1)
    _add_output(p)

    p = sub.add_parser("verify-fourier", help="Fourier transform of k/(1+k) for the Gaussian kernel")
    p.add_argument("--omega", type=float, default=2.65)
    p.add_argument("--N", type=int, default=10**6)
    p.add_argument("--normalization", choices=["unitary", "series", "angular"], default="unitary")
    _add_output(p, "json")

    p = sub.add_parser("oracle", help="brute-force Gibbs statistics for a small cost matrix")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--cost-matrix", help="CSV cost matrix")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--cost", default="squared_euclidean")
    _add_output(p, "json")
    return parser


def _emit(text: str, out):
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _emit_report(report: ResultReport, args):
    _emit(report_csv(report) if args.format == "csv" else report_json(report), args.out)


def _kind(args) -> DivergenceKind:
    return DivergenceKind.parse(args.kind, args.gamma)


def cmd_divergence(args) -> int:
    X, Y = load_series_csv(args.x), load_series_csv(args.y)
    print(fmt(evaluate(_kind(args), X, Y, CostKind.parse(args.cost))))
    return EXIT_OK


def _write_barycenter(res, args):
    _emit(matrix_csv(res.x), args.out)
    trace_path = args.trace or (str(Path(args.out).with_suffix("")) + ".trace.csv" if args.out else None)
    if trace_path:
        rows = "".join(f"{i},{fmt(v)}\n" for i, v in enumerate(res.objective_trace))
        write_text(trace_path, "iteration,objective\n" + rows)


def cmd_average(args) -> int:
    kind = _kind(args)
    if args.train:
        data = load_ucr(args.train, normalize=args.normalize)
        series = [Y for Y, y in zip(data.series, data.labels) if args.label is None or y == args.label]
    else:
        series = [load_series_csv(p) for p in args.series]
    if not series:
        raise DataError("no series selected")
    if args.pick is not None and args.pick < len(series):
        rng = np.random.default_rng(args.seed)
        series = [series[i] for i in sorted(rng.choice(len(series), args.pick, replace=False))]
    weights = None
    if args.weights == "uniform":
        weights = [1.0] * len(series)
    elif args.weights == "inverse_length":
        weights = [1.0 / len(Y) for Y in series]
    init = None if args.init == "auto" else args.init
    problem = AveragingProblem(series, kind, CostKind.parse(args.cost), weights, args.length, init)
    res = frechet_mean(problem, args.iters)
    logger.info("averaged %d series in %d iterations, objective %s", len(series),
                res.iterations, res.objective_trace[-1])
    _write_barycenter(res, args)
    return EXIT_OK


def cmd_interpolate(args) -> int:
    res = interpolate(load_series_csv(args.y1), load_series_csv(args.y2), args.pi, _kind(args),
                      CostKind.parse(args.cost), args.length, args.iters)
    _write_barycenter(res, args)
    return EXIT_OK


def cmd_classify(args) -> int:
    start = time.monotonic()
    cost = CostKind.parse(args.cost)
    train = load_ucr(args.train, normalize=args.normalize)
    test = load_ucr(args.test, normalize=args.normalize)
    k = 1 if args.method == "1nn" else args.k
    method = "centroid" if args.method == "centroid" else "1nn"
    gamma = None if args.gamma in (None, "auto") else _float(args.gamma, "--gamma")
    kind = DivergenceKind.parse(args.kind, gamma)
    deadline = Deadline(args.time_budget)
    meta = {"command": "classify", "dataset": train.name, "kind": kind.tag.value,
            "cost": cost.value, "method": args.method, "k": k, "seed": args.seed,
            "n_train": len(train), "n_test": len(test)}
    selection = None
    try:
        if args.gamma == "auto" and kind.uses_gamma:
            selection = select_gamma(train, kind, cost, args.grid, args.splits, args.seed,
                                     method, k, args.iters, args.threads, deadline)
            kind = kind.with_gamma(selection.gamma)
        if args.method == "centroid":
            model = fit_centroids(train, kind, cost, max_iters=args.iters, threads=args.threads,
                                  deadline=deadline)
            pred = centroid_predict(model, test.series, args.threads, deadline)
        else:
            pred = knn_predict(train, test.series, kind, cost, k, args.threads, deadline)
        acc = round(100.0 * accuracy(pred, test.labels), 2)
    except BudgetExceeded:
        pred, acc = None, "NA"
    if selection is not None:
        meta.update(cv_scores={fmt(g): s for g, s in selection.scores.items()},
                    cv_splits=selection.splits, cv_aggregation=selection.aggregation)
    row = {"dataset": train.name, "kind": kind.tag.value,
           "gamma": "" if kind.gamma is None else kind.gamma,
           "k": "" if args.method == "centroid" else k,
           "accuracy": acc if acc == "NA" else f"{acc:.2f}"}
    payload = {"columns": ["dataset", "kind", "gamma", "k", "accuracy"], "rows": [row]}
    if pred is not None and args.format == "json":
        payload["predictions"] = [int(p) for p in pred]
    report = ResultReport(meta, payload, wall_time=time.monotonic() - start)
    logger.info("classify finished in %.1fs", report.wall_time)
    _emit_report(report, args)
    return EXIT_OK


def _float(text, flag):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag} expects 'auto' or a number, got {text!r}") from None


def finite_difference_grad(f, X, eps):
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        Xp, Xm = X.copy(), X.copy()
        Xp[idx] += eps
        Xm[idx] -= eps
        G[idx] = (f(Xp) - f(Xm)) / (2 * eps)
    return G


def cmd_gradcheck(args) -> int:
    X, Y = load_series_csv(args.x), load_series_csv(args.y)
    cost = CostKind.parse(args.cost)
    tags = args.kind or [t.value for t in Tag if t is not Tag.DTW]
    rows, ok = [], True
    for name in tags:
        kind = DivergenceKind.parse(name, args.gamma)
        if kind.tag is Tag.EUCLIDEAN and X.shape != Y.shape:
            continue
        value, grad = divergence_grad_x(kind, X, Y, cost)
        fd = finite_difference_grad(lambda Z: evaluate(kind, Z, Y, cost), X, args.eps)
        err = float(np.max(np.abs(grad - fd)))
        scale = max(1.0, float(np.max(np.abs(fd))))
        passed = err <= args.tol * scale
        ok &= passed
        rows.append({"kind": kind.tag.value, "gamma": kind.gamma, "value": value,
                     "max_abs_error": err, "scale": scale, "passed": passed})
    C = build_cost(cost, X, Y)
    gamma = args.gamma if args.gamma is not None else 1.0
    E = dp.sdtw_value_and_grad(C, gamma)[1]
    fd = finite_difference_grad(lambda Z: dp.soft_dtw_forward(Z, gamma)[0], C, args.eps)
    err = float(np.max(np.abs(E - fd)))
    ok &= err <= args.tol
    rows.append({"kind": "sdtw_cost_matrix", "gamma": gamma, "value": None,
                 "max_abs_error": err, "scale": 1.0, "passed": err <= args.tol})
    report = ResultReport({"command": "gradcheck", "cost": cost.value, "eps": args.eps,
                           "tol": args.tol, "seed": args.seed},
                          {"columns": ["kind", "gamma", "value", "max_abs_error", "scale", "passed"],
                           "rows": rows})
    _emit_report(report, args)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_verify_gram(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    for rep in range(args.reps):
        if args.train:
            series = load_ucr(args.train).series
        else:
            lengths = rng.integers(2, args.length + 1, size=args.n_series)
            series = [rng.standard_normal((n, args.dim)) for n in lengths]
        for cost in args.cost:
            for gamma in args.gamma:
                eig = gram_min_eig(series, CostKind.parse(cost), gamma, args.threads)
                rows.append({"rep": rep, "cost": CostKind.parse(cost).value, "gamma": gamma,
                             "min_eig": eig})
    report = ResultReport({"command": "verify-gram", "seed": args.seed, "n_series": args.n_series,
                           "max_length": args.length, "dim": args.dim},
                          {"columns": ["rep", "cost", "gamma", "min_eig"], "rows": rows})
    _emit_report(report, args)
    return EXIT_OK


def cmd_verify_fourier(args) -> int:
    res = fourier_gauss_series(args.omega, args.N, args.normalization)
    upper = None if res.residual_bound is None else res.value + res.residual_bound
    row = {"omega": args.omega, "N": args.N, "value": res.value,
           "residual_bound": res.residual_bound, "upper_bound": upper,
           "certified_negative": upper is not None and upper < 0}
    report = ResultReport({"command": "verify-fourier", "seed": args.seed,
                           "normalization": args.normalization},
                          {"columns": list(row), "rows": [row]})
    _emit_report(report, args)
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.cost_matrix:
        C = load_series_csv(args.cost_matrix)
    elif args.x and args.y:
        C = build_cost(CostKind.parse(args.cost), load_series_csv(args.x), load_series_csv(args.y))
    else:
        raise UsageError("oracle needs --cost-matrix or both --x and --y")
    stats = oracle_stats(C, args.gamma)
    value, T = dp.soft_dtw_forward(C, args.gamma)
    row = {"gamma": args.gamma, "sdtw": stats.sdtw_value, "sdtw_dp": value,
           "entropy": stats.entropy, "mean_cost": stats.mean_cost_value,
           "dtw": stats.dtw_value, "path_count": stats.path_count}
    payload = {"columns": list(row), "rows": [row],
               "expected_alignment": stats.expected_alignment,
               "expected_alignment_dp": dp.expected_alignment(T)}
    _emit_report(ResultReport({"command": "oracle", "seed": args.seed}, payload), args)
    return EXIT_OK


COMMANDS = {
    "divergence": cmd_divergence, "average": cmd_average, "interpolate": cmd_interpolate,
    "classify": cmd_classify, "gradcheck": cmd_gradcheck, "verify-gram": cmd_verify_gram,
    "verify-fourier": cmd_verify_fourier, "oracle": cmd_oracle,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads is None:
        args.threads = default_threads()
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, NotDifferentiableError, NotImplementedError) as exc:
        print(f"tsdiv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, InputError, DimensionError, SizeError) as exc:
        print(f"tsdiv {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError, FloatingPointError) as exc:
        print(f"tsdiv {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())

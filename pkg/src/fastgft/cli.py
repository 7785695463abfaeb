"""Command-line front end.

Subcommands: ``gallery``, ``search``, ``plan``, ``apply``, ``bench`` and
``compare``. Graph arguments accept a graph JSON file or the name of a
gallery graph. Random signals are i.i.d. uniform on [0, 1] from
``numpy.random.default_rng(seed)``, drawn as an (M, n) array.

Exit codes: 0 ok, 2 usage or I/O error, 3 numerical validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .baseline import error_metrics, haar_plus_approx, truncated_jacobi
from .gallery import BENCHMARK_GRAPHS, gallery, get_entry
from .graph import Graph, graph_to_dict, laplacian, load_graph
from .plan import (
    PLAN_BUDGET,
    FastGftPlan,
    apply_batch,
    apply_node_major,
    as_dense,
    dense_plan,
    deserialize,
    op_count,
    plan_fast_gft,
    serialize,
)
from .spectral import gft
from .symmetry import DEFAULT_BUDGET, p_phi, search_involutions

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

#: Largest coefficient deviation from dense application accepted for exact plans.
DEVIATION_TOL = 1e-8

#: Below this many signals a timing is flagged as noisy.
FEW_SIGNALS = 100


class UsageError(Exception):
    """Bad input or file; maps to exit code 2."""


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _read_graph(spec: str) -> Graph:
    path = Path(spec)
    if path.exists():
        try:
            return load_graph(path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read graph {spec}: {exc}") from exc
    if spec in gallery():
        return gallery()[spec].graph
    raise UsageError(f"{spec}: no such file or gallery graph")


def _read_plan(path: str) -> FastGftPlan:
    try:
        return deserialize(Path(path).read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read plan {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"invalid plan {path}: {exc}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _signals(n: int, m: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).random((m, n))


def _median_seconds(fns: Sequence[Callable[[], object]], reps: int) -> list[float]:
    """Median wall time of each callable, timed round-robin so drift hits all alike."""
    for fn in fns:
        fn()  # warm-up: compilation and caches
    times = [[] for _ in fns]
    for _ in range(reps):
        for fn, acc in zip(fns, times):
            t0 = time.perf_counter()
            fn()
            acc.append(time.perf_counter() - t0)
    return [statistics.median(acc) for acc in times]


def _blas_threads(k: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        import contextlib

        return contextlib.nullcontext()
    return threadpool_limits(k)


def _layers(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad layer list {text!r}") from None
    if any(j < 0 for j in out):
        raise argparse.ArgumentTypeError("layer counts must be nonnegative")
    return out


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _reps(text: str) -> int:
    v = _positive(text)
    if v < 5:
        raise argparse.ArgumentTypeError("at least 5 repetitions are needed for a median")
    return v


# -- commands ---------------------------------------------------------------------


def cmd_gallery(args) -> int:
    if args.action == "list":
        for name, e in gallery().items():
            print(f"{name:12s} n={e.graph.n:3d}  {e.description}")
        return EXIT_OK
    if not args.name:
        raise UsageError("gallery emit needs a graph name")
    try:
        e = get_entry(args.name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    _write(args.out, json.dumps(graph_to_dict(e.graph), indent=1) + "\n")
    return EXIT_OK


def cmd_search(args) -> int:
    g = _read_graph(args.graph)
    found = search_involutions(g, budget=args.budget)
    rows = [{"phi": list(phi), "p": p_phi(phi)} for phi in found]
    for r in rows:
        print(f"p={r['p']:3d}  {r['phi']}")
    if not rows:
        print("no nontrivial involutive symmetry found")
    if getattr(found, "truncated", False):
        _warn("search budget exhausted; the list may be incomplete")
    if args.out:
        _write(args.out, json.dumps(rows) + "\n")
    return EXIT_OK


def cmd_plan(args) -> int:
    g = _read_graph(args.graph)
    kwargs = {"budget": args.budget}
    if args.max_depth is not None:
        kwargs["max_depth"] = args.max_depth
    plan = plan_fast_gft(g, **kwargs)
    dense = op_count(dense_plan(g))
    print(plan.summary())
    print(f"Haar stages: {plan.num_haar_stages}; dense ops {dense} (adds/mults)")
    if plan.num_haar_stages == 0:
        _warn("no usable symmetry; the plan is a dense transform")
    if args.out:
        _write(args.out, serialize(plan).decode() + "\n")
    return EXIT_OK


def cmd_apply(args) -> int:
    plan = _read_plan(args.plan)
    try:
        X = np.loadtxt(args.signals, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read signals {args.signals}: {exc}") from exc
    if X.shape[1] != plan.n:
        raise UsageError(f"signals have length {X.shape[1]}, plan expects {plan.n}")
    Y = apply_batch(plan, X, threads=args.threads)
    buf = io.StringIO()
    np.savetxt(buf, Y, delimiter=",", fmt="%.17g")
    _write(args.out, buf.getvalue())
    return EXIT_OK


def bench_rows(names: Sequence[str], m: int, reps: int, seed: int, threads: int = 1) -> list[dict]:
    """Time fast plans against dense application of the same transform.

    Both run through the same executor on node-major signals, so only the
    stage structure differs. ``blas_ms`` is a plain ``U^T S`` product for
    reference.
    """
    rows = []
    for name in names:
        entry = get_entry(name)
        g = entry.graph
        fast = plan_fast_gft(g)
        dense = as_dense(fast)
        S = np.ascontiguousarray(_signals(g.n, m, seed).T)
        UT = np.ascontiguousarray(dense.stages[0].matrix)
        with _blas_threads(1):
            t_dense, t_fast, t_blas = _median_seconds(
                (lambda: apply_node_major(dense, S, threads=threads),
                 lambda: apply_node_major(fast, S, threads=threads),
                 lambda: UT @ S),
                reps,
            )
        dev = float(np.abs(apply_node_major(fast, S) - apply_node_major(dense, S)).max(initial=0.0))
        ref = entry.reference_ops
        dense_ops = op_count(dense_plan(g))
        rows.append({
            "graph": name,
            "n": g.n,
            "dense_adds": dense_ops.additions,
            "dense_mults": dense_ops.multiplications,
            "fast_adds": op_count(fast).additions,
            "fast_mults": op_count(fast).multiplications,
            "ref_fast_adds": ref[1][0] if ref else None,
            "ref_fast_mults": ref[1][1] if ref else None,
            "dense_ms": 1e3 * t_dense,
            "fast_ms": 1e3 * t_fast,
            "blas_ms": 1e3 * t_blas,
            "reduction": 1.0 - t_fast / t_dense,
            "reduction_vs_blas": 1.0 - t_fast / t_blas,
            "ref_reduction": entry.reference_reduction,
            "max_deviation": dev,
        })
    return rows


def _pct(v: Optional[float]) -> str:
    return "-" if v is None else f"{100 * v:.1f}%"


def format_bench(rows: list[dict]) -> str:
    head = (f"{'graph':12s} {'n':>3s} {'dense a/m':>11s} {'fast a/m':>11s} {'ref a/m':>11s} "
            f"{'dense ms':>9s} {'fast ms':>8s} {'reduct':>7s} {'ref':>6s} {'blas ms':>8s} {'vs blas':>8s} {'max dev':>8s}")
    lines = [head]
    for r in rows:
        ref = "-" if r["ref_fast_adds"] is None else f"{r['ref_fast_adds']}/{r['ref_fast_mults']}"
        lines.append(
            f"{r['graph']:12s} {r['n']:3d} {r['dense_adds']:>5d}/{r['dense_mults']:<5d} "
            f"{r['fast_adds']:>5d}/{r['fast_mults']:<5d} {ref:>11s} "
            f"{r['dense_ms']:9.3f} {r['fast_ms']:8.3f} {_pct(r['reduction']):>7s} {_pct(r['ref_reduction']):>6s} "
            f"{r['blas_ms']:8.3f} {_pct(r['reduction_vs_blas']):>8s} {r['max_deviation']:8.1e}"
        )
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    names = [t for t in args.graphs.split(",") if t.strip()] if args.graphs is not None else list(BENCHMARK_GRAPHS)
    for name in names:
        if name not in gallery():
            raise UsageError(f"unknown gallery graph {name!r}")
    if args.signals < FEW_SIGNALS:
        _warn(f"only {args.signals} signals; timings will be noisy")
    rows = bench_rows(names, args.signals, args.reps, args.seed, args.threads)
    sys.stdout.write(format_bench(rows))
    if args.out:
        _write(args.out, json.dumps({"signals": args.signals, "reps": args.reps, "seed": args.seed,
                                     "rows": rows}, indent=1) + "\n")
    bad = [r["graph"] for r in rows if r["max_deviation"] > DEVIATION_TOL]
    if bad:
        print(f"error: coefficients differ from dense application on {', '.join(bad)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def compare_rows(g: Graph, layers: Sequence[int], m: int, reps: int, seed: int) -> tuple[list[dict], bool]:
    """Runtime and errors of the four implementations; also whether Haar variants ran."""
    spec = gft(g)
    U = spec.eigenvectors
    X = _signals(g.n, m, seed)
    S = np.ascontiguousarray(X.T)
    found = search_involutions(g)
    rows = []

    def record(label, J, plan):
        with _blas_threads(1):
            (t,) = _median_seconds((lambda: apply_node_major(plan, S),), reps)
        e = error_metrics(plan.matrix(), U, X)
        rows.append({"implementation": label, "J": J, "runtime_ms": 1e3 * t,
                     "delta": e.delta, "epsilon": e.epsilon})

    record("matrix", "", dense_plan(g))
    if found:
        record("haar+matrix", "", plan_fast_gft(g, max_depth=1))
    L = laplacian(g)
    for J in layers:
        record("approx", J, truncated_jacobi(L, J).to_plan())
        if found:
            record("haar+approx", J, haar_plus_approx(g, found[0], J))
    return rows, bool(found)


def cmd_compare(args) -> int:
    g = _read_graph(args.graph)
    rows, symmetric = compare_rows(g, args.layers, args.signals, args.reps, args.seed)
    if not symmetric:
        print("notice: no involutive symmetry found; Haar variants skipped", file=sys.stderr)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["implementation", "J", "runtime_ms", "delta", "epsilon"],
                       lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "runtime_ms": f"{r['runtime_ms']:.6g}", "delta": f"{r['delta']:.6g}",
                    "epsilon": f"{r['epsilon']:.6g}"})
    _write(args.out, buf.getvalue())
    if any(not math.isfinite(r["delta"]) or not math.isfinite(r["epsilon"]) for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random signals (default 0)")
    common.add_argument("--out", help="write machine-readable output here ('-' for stdout)")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads for batch application")

    p = argparse.ArgumentParser(prog="fastgft", description="Fast graph Fourier transforms from graph symmetries.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gallery", parents=[common], help="list or emit gallery graphs")
    s.add_argument("action", choices=["list", "emit"])
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_gallery)

    s = sub.add_parser("search", parents=[common], help="find involutive symmetries of a graph")
    s.add_argument("graph")
    s.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help="cap on search extensions")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("plan", parents=[common], help="build a fast GFT plan")
    s.add_argument("graph")
    s.add_argument("--budget", type=_positive, default=PLAN_BUDGET, help="search budget per planner level")
    s.add_argument("--max-depth", type=int, default=None, help="limit on nested Haar levels")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("apply", parents=[common], help="apply a plan to CSV signals (one per row)")
    s.add_argument("plan")
    s.add_argument("signals")
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("bench", parents=[common], help="time fast plans against dense application")
    s.add_argument("--graphs", default=None, help="comma-separated gallery names (default: the benchmark set)")
    s.add_argument("--signals", type=_positive, default=20000)
    s.add_argument("--reps", type=_reps, default=5)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("compare", parents=[common], help="runtime and error of exact and approximate GFTs")
    s.add_argument("graph")
    s.add_argument("--layers", type=_layers, default=_layers("0,5,10,15,20,25,30,35,40"))
    s.add_argument("--signals", type=_positive, default=20000)
    s.add_argument("--reps", type=_reps, default=5)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:  # pragma: no cover
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

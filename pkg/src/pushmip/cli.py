"""Command line: ``solve`` one instance, ``bench`` a directory, ``summarize`` a CSV."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench.harness import HEURISTICS, RunConfig, SuiteError, run_instance, run_suite
from .bench.report import emit_csv, emit_summary_csv, format_summary, read_records_csv, summarize
from .bench.suite import write_suite
from .lp import ConfigError
from .mps import MpsError, read_best_known

log = logging.getLogger("pushmip")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _heuristic_list(text: str) -> list[str]:
    items = [h.strip() for h in text.split(",") if h.strip()]
    if items == ["all"]:
        return list(HEURISTICS)
    for h in items:
        if h not in HEURISTICS:
            raise argparse.ArgumentTypeError(f"unknown heuristic {h!r}")
    return items


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rt", type=float, default=0.6, help="PUSH rounding threshold")
    p.add_argument("--alpha", type=float, default=0.0, help="objective weight in the projection LP")
    p.add_argument("--random-sensitivity", type=float, default=0.5)
    p.add_argument("--maxiter", type=int, default=250)
    p.add_argument("--time-limit", type=float, default=900.0, metavar="SECS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pushmip", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one heuristic on one MPS file")
    p.add_argument("file")
    p.add_argument("--heuristic", required=True, choices=HEURISTICS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--best-known", metavar="FILE")
    _add_run_options(p)

    p = sub.add_parser("bench", help="run heuristics over a directory of MPS files")
    p.add_argument("dir")
    p.add_argument("--heuristics", type=_heuristic_list, default=list(HEURISTICS))
    p.add_argument("--best-known", metavar="FILE")
    p.add_argument("--quartiles", action="store_true")
    p.add_argument("--out", metavar="FILE.csv")
    p.add_argument("--summary-out", metavar="FILE.csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--no-timing", action="store_true", help="leave the time column empty")
    p.add_argument("--percent", action="store_true", help="render gaps as percentages")
    _add_run_options(p)

    p = sub.add_parser("rt-sweep", help="PUSH over a grid of rounding thresholds")
    p.add_argument("dir")
    p.add_argument("--rts", type=_float_list, default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--maxiter", type=int, default=250)
    p.add_argument("--time-limit", type=float, default=900.0)

    p = sub.add_parser("summarize", help="summary table from a records CSV")
    p.add_argument("csv")
    p.add_argument("--quartiles", action="store_true")
    p.add_argument("--percent", action="store_true")

    p = sub.add_parser("make-suite", help="write the generated small-instance suite")
    p.add_argument("outdir")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(maxiter=args.maxiter, rt=args.rt, alpha=args.alpha,
                     random_sensitivity=args.random_sensitivity, time_limit=args.time_limit)


def _cmd_solve(args) -> int:
    best = read_best_known(args.best_known) if args.best_known else None
    rec = run_instance(args.file, args.heuristic, _config(args), args.seed, best_known=best)
    print(f"instance   {rec.instance}")
    print(f"heuristic  {rec.heuristic}")
    print(f"status     {rec.status}")
    print(f"time       {rec.elapsed:.4f}")
    print(f"iterations {rec.iterations}")
    if rec.solved:
        print(f"objective  {rec.objective!r}")
        if rec.gap is not None:
            print(f"gap        {'outlier' if rec.gap.is_outlier else repr(rec.gap.gap)}")
        return EXIT_OK
    print(f"reason     {rec.reason}")
    return EXIT_FAILED


def _cmd_bench(args) -> int:
    best = read_best_known(args.best_known) if args.best_known else None
    records = run_suite(args.dir, args.heuristics, _config(args), args.seeds, best, args.jobs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            emit_csv(records, fh, timing=not args.no_timing)
    if records:
        table = summarize(records, quartiles=args.quartiles)
        print(format_summary(table, percent_gap=args.percent))
        if args.summary_out:
            with open(args.summary_out, "w", newline="", encoding="utf-8") as fh:
                emit_summary_csv(table, fh)
    else:
        print("no instances found")
    return EXIT_OK


def _cmd_rt_sweep(args) -> int:
    best = None
    candidate = Path(args.dir) / "best_known.csv"
    if candidate.exists():
        best = read_best_known(candidate)
    print("instance".ljust(12) + "".join(f"rt={rt:g}".rjust(22) for rt in args.rts))
    per_rt = {}
    for rt in args.rts:
        cfg = RunConfig(maxiter=args.maxiter, rt=rt, time_limit=args.time_limit)
        per_rt[rt] = run_suite(args.dir, ["push"], cfg, [args.seed], best)
    names = [r.instance for r in per_rt[args.rts[0]]] if args.rts else []
    for k, name in enumerate(names):
        cells = []
        for rt in args.rts:
            r = per_rt[rt][k]
            obj = f"{r.objective:.6g}" if r.solved else "-"
            t = f"{r.elapsed:.2f}" if r.solved else "-"
            cells.append(f"{t:>8} {obj:>13}")
        print(name.ljust(12) + "".join(c.rjust(22) for c in cells))
    return EXIT_OK


def _cmd_summarize(args) -> int:
    with open(args.csv, newline="", encoding="utf-8") as fh:
        records = read_records_csv(fh)
    if not records:
        print("no records")
        return EXIT_OK
    print(format_summary(summarize(records, quartiles=args.quartiles), percent_gap=args.percent))
    return EXIT_OK


def _cmd_make_suite(args) -> int:
    paths = write_suite(args.outdir)
    print(f"wrote {len(paths)} instances to {args.outdir}")
    return EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "rt-sweep": _cmd_rt_sweep,
    "summarize": _cmd_summarize,
    "make-suite": _cmd_make_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MpsError, SuiteError, ConfigError, ValueError, OSError) as exc:
        print(f"pushmip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .exceptions import ConfigurationError, UPMSPError
from .experiment import (COMPARE_COLUMNS, ExperimentPlan, SolveConfig, compare,
                         expand_paths, generate_grid, grid_cells, parse_grid,
                         run_experiment, solve, write_csv)
from .regression import fit_models, load_models, save_models
from .report import write_report
from .telemetry import read_events

EXIT_USAGE = 1
EXIT_DATA = 2

logger = logging.getLogger("upmsp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed():
    value = os.environ.get("UPMSP_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"UPMSP_SEED must be an integer, got {value!r}") from None


def _existing(*paths):
    for path in paths:
        if path is not None and not Path(path).exists():
            raise UsageError(f"no such file or directory: {path}")


def _inputs(items, suffixes):
    for item in items:
        if not any(ch in item for ch in "*?["):
            _existing(item)
    return expand_paths(items, suffixes)


def _budget(value):
    return None if value is not None and value <= 0 else value


def _plateau(value):
    if value == "budget":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'budget'") from None


def _add_search_flags(p):
    p.add_argument("--budget-ms", type=float, default=30000,
                   help="search-time budget in ms (0 disables; default 30000)")
    p.add_argument("--max-iters", type=int, default=1_000_000,
                   help="iteration cap (0 disables; default 1e6)")
    p.add_argument("--alpha", type=float, default=0.96, help="cooling rate")
    p.add_argument("--plateau", type=_plateau, default=None,
                   help="iterations per temperature (default n*m), or 'budget' "
                        "to spread the cooling over the whole budget")
    p.add_argument("--t0", default="auto", help="initial temperature or 'auto'")
    p.add_argument("--p-max", type=float, default=0.5)
    p.add_argument("--record-every", type=int, default=1,
                   help="census every k-th incumbent change")


def _solve_config(args, policy="uniform", model=None):
    t0 = args.t0
    if t0 != "auto":
        try:
            t0 = float(t0)
        except ValueError:
            raise UsageError("--t0 must be a number or 'auto'") from None
    if args.record_every < 1:
        raise UsageError("--record-every must be >= 1")
    return SolveConfig(
        budget_ms=_budget(args.budget_ms),
        max_iters=args.max_iters if args.max_iters > 0 else None,
        cooling_rate=args.alpha,
        plateau_length=args.plateau,
        initial_temperature=t0,
        policy=policy,
        model_path=model,
        p_max=args.p_max,
        record_every=args.record_every,
    )


def build_parser():
    parser = _Parser(prog="upmsp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write instance files")
    p.add_argument("--machines", type=int, nargs="+", required=True)
    p.add_argument("--jobs", type=int, nargs="+", required=True)
    p.add_argument("--max-setup", type=int, nargs="+", required=True)
    p.add_argument("--proc-low", type=int, default=1)
    p.add_argument("--proc-high", type=int, default=99)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count", type=int, default=1,
                   help="instances per cell (seeds seed, seed+1, ...)")
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("solve", help="run simulated annealing on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policy", choices=("uniform", "adaptive"), default="uniform")
    p.add_argument("--model")
    p.add_argument("--telemetry", help="write census events (JSON Lines) here")
    p.add_argument("--exhaustive-check", action="store_true",
                   help="compare with the brute-force optimum (n <= 8)")
    _add_search_flags(p)

    p = sub.add_parser("experiment", help="instrumented runs over a grid")
    p.add_argument("--grid", default=None,
                   help="e.g. 'M=2,4;J=20,40;S=9,99' (default: desk grid)")
    p.add_argument("--instances-per-cell", type=int, default=2)
    p.add_argument("--seeds", type=int, nargs="+", default=None,
                   help="annealing seeds per instance (default: UPMSP_SEED or 0)")
    p.add_argument("--instance-seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs-parallel", type=int, default=os.cpu_count() or 1)
    p.add_argument("--proc-low", type=int, default=1)
    p.add_argument("--proc-high", type=int, default=99)
    _add_search_flags(p)

    p = sub.add_parser("fit", help="fit utility models from telemetry")
    p.add_argument("--telemetry", nargs="+", required=True,
                   help="files, directories or glob patterns")
    p.add_argument("--out", required=True)
    p.add_argument("--aliased", choices=("drop", "raise"), default="drop",
                   help="handling of aliased model terms (default: drop)")

    p = sub.add_parser("compare", help="paired uniform vs adaptive runs")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seeds", type=int, nargs="+", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--jobs-parallel", type=int, default=os.cpu_count() or 1)
    _add_search_flags(p)

    p = sub.add_parser("report", help="tables and SVG plots")
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   help="telemetry (.jsonl, dirs), model (.json), comparison (.csv)")
    p.add_argument("--out-dir", required=True)
    return parser


def cmd_generate(args):
    seed = args.seed if args.seed is not None else _default_seed()
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    cells = grid_cells({"M": args.machines, "J": args.jobs, "S": args.max_setup})
    paths = generate_grid(cells, args.out, args.count, seed, args.proc_low,
                          args.proc_high)
    for path in paths:
        print(path)


def cmd_solve(args):
    if args.policy == "adaptive" and not args.model:
        raise UsageError("--policy adaptive requires --model")
    _existing(args.instance, args.model)
    seed = args.seed if args.seed is not None else _default_seed()
    config = _solve_config(args, args.policy, args.model)
    result = solve(args.instance, seed, config, telemetry_path=args.telemetry,
                   exhaustive=args.exhaustive_check)
    print(json.dumps(result, indent=2))


def cmd_experiment(args):
    cells = parse_grid(args.grid) if args.grid else grid_cells()
    seeds = args.seeds if args.seeds is not None else [_default_seed()]
    plan = ExperimentPlan(
        cells=cells,
        out_dir=args.out_dir,
        instances_per_cell=args.instances_per_cell,
        seeds=seeds,
        instance_seed=args.instance_seed if args.instance_seed is not None
        else _default_seed(),
        config=_solve_config(args),
        parallel=args.jobs_parallel,
        proc_low=args.proc_low,
        proc_high=args.proc_high,
    )
    results = run_experiment(plan)
    print(f"{len(results)} runs, "
          f"{sum(r['recorded_events'] for r in results)} events -> {args.out_dir}")


def cmd_fit(args):
    paths = _inputs(args.telemetry, {".jsonl"})
    if not paths:
        raise UsageError("no telemetry files matched")
    events = read_events(paths)
    models = fit_models(events, aliased=args.aliased)
    save_models(models, args.out)
    for nb, m in models.items():
        extra = f" (aliased terms fixed at 0: {', '.join(m.dropped_terms_)})" \
            if m.dropped_terms_ else ""
        print(f"{nb.label}: rows={m.n_rows_} r2={m.r2_:.4f}{extra}")


def cmd_compare(args):
    paths = _inputs(args.instances, {".txt"})
    if not paths:
        raise UsageError("no instance files matched")
    _existing(args.model)
    config = _solve_config(args)
    rows = compare(paths, args.model, args.seeds, config, args.jobs_parallel)
    write_csv(args.out, COMPARE_COLUMNS, rows)
    print(f"{len(rows)} paired rows -> {args.out}")


def cmd_report(args):
    telemetry, models, comparison = [], None, None
    for item in args.inputs:
        if not any(ch in item for ch in "*?["):
            _existing(item)
        p = Path(item)
        if p.suffix == ".json":
            models = load_models(p)
        elif p.suffix == ".csv":
            with open(p, encoding="utf-8", newline="") as fh:
                comparison = list(csv.DictReader(fh))
        else:
            telemetry.extend(_inputs([item], {".jsonl"}))
    if not telemetry:
        raise UsageError("report needs at least one telemetry file")
    events = read_events(telemetry)
    for path in write_report(events, args.out_dir, models, comparison):
        print(path)


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "experiment": cmd_experiment,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigurationError) as exc:
        print(f"upmsp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UPMSPError, OSError, ValueError) as exc:
        print(f"upmsp {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Experiment harness: instance grids, instrumented runs, paired comparisons.

Runs are share-nothing; each one reads its instance file and writes its
own telemetry file, so they can be fanned out over processes.
"""

import csv
import glob
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .annealing import AnnealingScheduler
from .exceptions import ConfigurationError
from .exhaustive import MAX_JOBS, optimal_makespan
from .instances import GeneratorSpec, generate, instance_filename, read_instance, write_instance
from .regression import load_models
from .telemetry import Recorder

logger = logging.getLogger(__name__)

DESK_GRID = {"M": (2, 4), "J": (20, 40), "S": (9, 99)}


def parse_grid(text):
    """Parse ``"M=2,4;J=20,40;S=9,99"`` into a list of (M, J, S) cells."""
    axes = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, _, values = part.partition("=")
        key = key.strip().upper()
        if key not in ("M", "J", "S") or not values:
            raise ConfigurationError(f"bad grid axis {part!r}; expected e.g. M=2,4")
        try:
            axes[key] = tuple(int(v) for v in values.split(","))
        except ValueError:
            raise ConfigurationError(f"bad grid values in {part!r}") from None
        if min(axes[key]) < 1:
            raise ConfigurationError(f"grid values must be positive in {part!r}")
    missing = {"M", "J", "S"} - set(axes)
    if missing:
        raise ConfigurationError(f"grid lacks axes {sorted(missing)}")
    return grid_cells(axes)


def grid_cells(axes=DESK_GRID):
    return [(M, J, S) for M in axes["M"] for J in axes["J"] for S in axes["S"]]


def generate_grid(cells, out_dir, instances_per_cell=2, seed=0, proc_low=1,
                  proc_high=99):
    """Write one file per (cell, replicate); replicate r uses seed + r."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for M, J, S in cells:
        for r in range(instances_per_cell):
            spec = GeneratorSpec(M, J, S, proc_low, proc_high, seed + r)
            path = out_dir / instance_filename(M, J, S, seed + r)
            write_instance(generate(spec), path)
            paths.append(path)
    return paths


def expand_paths(items, suffixes):
    """Files named by `items` (files, directories or glob patterns)."""
    out = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            out.extend(sorted(q for q in p.rglob("*") if q.suffix in suffixes))
        elif any(ch in str(item) for ch in "*?["):
            out.extend(sorted(Path(g) for g in glob.glob(str(item), recursive=True)))
        else:
            out.append(p)
    return out


@dataclass
class SolveConfig:
    budget_ms: float | None = 30000
    max_iters: int | None = 1_000_000
    cooling_rate: float = 0.96
    plateau_length: int | str | None = None
    initial_temperature: object = "auto"
    policy: str = "uniform"
    model_path: str | None = None
    p_max: float = 0.5
    record_every: int = 1

    def scheduler(self, seed, models=None):
        if self.policy == "adaptive" and models is None:
            if self.model_path is None:
                raise ConfigurationError("adaptive policy requires a model file")
            models = load_models(self.model_path)
        return AnnealingScheduler(
            initial_temperature=self.initial_temperature,
            cooling_rate=self.cooling_rate,
            plateau_length=self.plateau_length,
            budget_ms=self.budget_ms,
            max_iters=self.max_iters,
            policy=self.policy,
            models=models,
            p_max=self.p_max,
            random_state=seed,
        )


def solve(instance_path, seed, config, telemetry_path=None, exhaustive=False,
          models=None):
    """Solve one instance file and return a JSON-ready result record."""
    instance = read_instance(instance_path)
    sa = config.scheduler(seed, models)
    recorder = None
    fh = None
    run_id = f"{Path(instance_path).stem}_r{seed}"
    try:
        if telemetry_path is not None:
            Path(telemetry_path).parent.mkdir(parents=True, exist_ok=True)
            fh = open(telemetry_path, "w", encoding="utf-8", newline="\n")
            recorder = Recorder(fh, run_id, config.record_every)
        sa.fit(instance, recorder)
    finally:
        if fh is not None:
            fh.close()
    best = sa.best_
    result = {
        "run_id": run_id,
        "instance": str(instance_path),
        "M": instance.n_machines,
        "J": instance.n_jobs,
        "S": instance.max_setup,
        "seed": seed,
        "policy": config.policy,
        "p_max": config.p_max if config.policy == "adaptive" else None,
        "budget_ms": config.budget_ms,
        "max_iters": config.max_iters,
        "cmax": best.cmax,
        "spt": best.spt,
        "sequences": best.sequences,
        "iterations": sa.n_iter_,
        "incumbent_changes": sa.n_changes_,
        "initial_temperature": sa.initial_temperature_,
        "telemetry": str(telemetry_path) if telemetry_path else None,
        "recorded_events": recorder.recorded if recorder else 0,
    }
    if exhaustive:
        if instance.n_jobs > MAX_JOBS:
            raise ConfigurationError(
                f"--exhaustive-check is limited to {MAX_JOBS} jobs")
        opt, _ = optimal_makespan(instance)
        result["exhaustive_optimum"] = opt
        result["optimal"] = best.cmax == opt
    logger.info("solved %s seed=%s cmax=%s in %.0f ms search time",
                instance_path, seed, best.cmax, sa.search_ms_)
    return result


@dataclass
class ExperimentPlan:
    cells: list
    out_dir: str
    instances_per_cell: int = 2
    seeds: list = field(default_factory=lambda: [0])
    instance_seed: int = 0
    config: SolveConfig = field(default_factory=SolveConfig)
    parallel: int = 1
    proc_low: int = 1
    proc_high: int = 99


def _run_task(task):
    path, seed, config, tele = task
    return solve(path, seed, config, telemetry_path=tele)


def _fan_out(fn, tasks, parallel):
    if parallel <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, tasks))


def run_experiment(plan):
    """Generate the grid and run every (instance, seed) with telemetry.

    Writes ``instances/``, ``telemetry/`` and ``runs.csv`` under
    ``plan.out_dir`` and returns the result records in task order.
    """
    out = Path(plan.out_dir)
    paths = generate_grid(plan.cells, out / "instances", plan.instances_per_cell,
                          plan.instance_seed, plan.proc_low, plan.proc_high)
    tasks = [(str(p), seed, plan.config,
              str(out / "telemetry" / f"{p.stem}_r{seed}.jsonl"))
             for p in paths for seed in plan.seeds]
    results = _fan_out(_run_task, tasks, plan.parallel)
    write_csv(out / "runs.csv", RUN_COLUMNS, results)
    return results


RUN_COLUMNS = ("run_id", "instance", "M", "J", "S", "seed", "policy", "cmax",
               "spt", "iterations", "incumbent_changes", "recorded_events",
               "telemetry")
COMPARE_COLUMNS = ("instance", "M", "J", "S", "seed", "cmax_uniform",
                   "cmax_adaptive", "difference")


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _compare_task(task):
    path, seed, config, model_path = task
    uniform = solve(path, seed, SolveConfig(**{**vars(config), "policy": "uniform"}))
    adaptive = solve(path, seed, SolveConfig(**{**vars(config), "policy": "adaptive",
                                                "model_path": model_path}))
    return {
        "instance": os.path.basename(path),
        "M": uniform["M"], "J": uniform["J"], "S": uniform["S"],
        "seed": seed,
        "cmax_uniform": uniform["cmax"],
        "cmax_adaptive": adaptive["cmax"],
        "difference": adaptive["cmax"] - uniform["cmax"],
    }


def compare(instance_paths, model_path, seeds, config, parallel=1):
    """Paired uniform-vs-adaptive runs, one row per (instance, seed).

    ``difference`` is adaptive minus uniform makespan (negative favours
    the adaptive policy).
    """
    load_models(model_path)  # fail fast on a bad model file
    tasks = [(str(p), seed, config, str(model_path))
             for p in instance_paths for seed in seeds]
    return _fan_out(_compare_task, tasks, parallel)

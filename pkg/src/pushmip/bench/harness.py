"""Benchmark harness: run heuristics over instances and collect RunRecords."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from ..heuristics import (
    FAILURE,
    HeuristicOutcome,
    PreconditionError,
    expired,
    fail,
    rounding,
    shifting,
    simple_rounding,
)
from ..lp import SimplexSolver, SolverConfig
from ..model import GapReport, MipInstance, optimality_gap
from ..mps import read_mps
from ..pump import PumpConfig, feasibility_pump, relaxation_failure, solve_relaxation
from ..push import PushConfig, push

HEURISTICS = ("simple-rounding", "rounding", "shifting", "fp", "push")
DEFAULT_TIME_LIMIT = 900.0


class SuiteError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    maxiter: int = 250
    rt: float = 0.6
    alpha: float = 0.0
    random_sensitivity: float = 0.5
    T_fraction: float = 0.1
    time_limit: float = DEFAULT_TIME_LIMIT
    lp: SolverConfig = field(default_factory=SolverConfig)

    def pump(self) -> PumpConfig:
        return PumpConfig(maxiter=self.maxiter, alpha=self.alpha, T_fraction=self.T_fraction,
                          lp=self.lp)

    def push(self) -> PushConfig:
        return PushConfig(maxiter=self.maxiter, rt=self.rt, alpha=self.alpha,
                          random_sensitivity=self.random_sensitivity, lp=self.lp)


@dataclass
class RunRecord:
    instance: str
    heuristic: str
    seed: int
    status: str
    elapsed: float
    objective: Optional[float]
    gap: Optional[GapReport]
    n_vars: int
    n_int: int
    n_constrs: int
    n_nonzeros: int
    iterations: int = 0
    reason: Optional[str] = None

    @property
    def solved(self) -> bool:
        return self.status == "success"


def _rounding_family(fn, inst, lp_cfg, deadline):
    started = time.perf_counter()
    relax = solve_relaxation(inst, SimplexSolver(), lp_cfg)
    if not relax.optimal:
        return relaxation_failure(relax.status, started)
    try:
        out = fn(inst, relax.x, deadline=deadline)
    except PreconditionError as exc:
        return HeuristicOutcome(FAILURE, reason=str(exc), lp_solves=1,
                                elapsed=time.perf_counter() - started)
    out.lp_solves = 1
    return out


def run_heuristic(inst: MipInstance, heuristic: str, config: RunConfig, seed: int,
                  deadline: Optional[float] = None) -> HeuristicOutcome:
    rng = np.random.default_rng(seed)
    if expired(deadline):
        return fail("time limit", 0, time.perf_counter())
    if heuristic == "simple-rounding":
        return _rounding_family(simple_rounding, inst, config.lp, deadline)
    if heuristic == "rounding":
        return _rounding_family(rounding, inst, config.lp, deadline)
    if heuristic == "shifting":
        return _rounding_family(shifting, inst, config.lp, deadline)
    if heuristic == "fp":
        return feasibility_pump(inst, config.pump(), rng, deadline=deadline)
    if heuristic == "push":
        return push(inst, config.push(), rng, deadline=deadline)
    raise ValueError(f"unknown heuristic {heuristic!r}; expected one of {', '.join(HEURISTICS)}")


def run_instance(source: Union[str, Path, MipInstance], heuristic: str,
                 config: RunConfig = RunConfig(), seed: int = 0,
                 time_limit: Optional[float] = None,
                 best_known: Optional[dict] = None) -> RunRecord:
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; expected one of {', '.join(HEURISTICS)}")
    inst = source if isinstance(source, MipInstance) else read_mps(source)
    limit = config.time_limit if time_limit is None else time_limit
    started = time.perf_counter()
    out = run_heuristic(inst, heuristic, config, seed, deadline=started + limit)
    elapsed = time.perf_counter() - started
    objective = gap = None
    if out.success:
        objective = inst.report_objective(out.point)
        if best_known is not None and inst.name in best_known:
            gap = optimality_gap(objective, best_known[inst.name])
    return RunRecord(
        instance=inst.name, heuristic=heuristic, seed=seed, status=out.status,
        elapsed=elapsed, objective=objective, gap=gap, n_vars=inst.n,
        n_int=len(inst.integer), n_constrs=inst.m, n_nonzeros=inst.nnz,
        iterations=out.iterations, reason=out.reason,
    )


def instance_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise SuiteError(f"cannot read directory {directory}")
    return sorted(p for p in d.iterdir()
                  if p.is_file() and (p.name.lower().endswith(".mps") or p.name.lower().endswith(".mps.gz")))


def _run_task(task):
    path, heuristic, config, seed, best_known = task
    return run_instance(path, heuristic, config, seed, best_known=best_known)


def run_suite(directory, heuristics: Sequence[str], config: RunConfig = RunConfig(),
              seeds: Sequence[int] = (0,), best_known: Optional[dict] = None,
              jobs: int = 1) -> list[RunRecord]:
    for h in heuristics:
        if h not in HEURISTICS:
            raise ValueError(f"unknown heuristic {h!r}")
    by_name: dict[str, Path] = {}
    for path in instance_files(directory):
        name = read_mps(path).name
        if name in by_name:
            raise SuiteError(f"ambiguous instance {name!r}: {by_name[name].name} and {path.name}")
        by_name[name] = path
    tasks = [(by_name[name], h, config, int(s), best_known)
             for name in sorted(by_name) for h in heuristics for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = [_run_task(t) for t in tasks]
    order = {h: k for k, h in enumerate(heuristics)}
    records.sort(key=lambda r: (r.instance, order[r.heuristic], r.seed))
    return records

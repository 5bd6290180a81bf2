"""Feasibility Pump with one-length and long-cycle perturbation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .heuristics import HeuristicOutcome, expired, fail, succeed
from .lp import (
    INFEASIBLE,
    UNBOUNDED,
    ConfigError,
    SimplexSolver,
    SolverConfig,
    build_l1lp,
    build_relaxation,
    l1_distance,
)
from .model import INT_TOL, MipInstance, fractional_set, fractionality, round_half_array

NO_CYCLE = "none"
ONE_LENGTH = "one_length"
LONG = "long"

DIST_TOL = 1e-6


@dataclass(frozen=True)
class PumpConfig:
    maxiter: int = 250
    alpha: float = 0.0
    T_fraction: float = 0.1
    int_tol: float = INT_TOL
    dist_tol: float = DIST_TOL
    lp: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.maxiter < 1:
            raise ConfigError("maxiter must be at least 1")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError("alpha must lie in [0, 1)")
        if not 0.0 < self.T_fraction <= 1.0:
            raise ConfigError("T_fraction must lie in (0, 1]")


class PumpHistory:
    """Rounded iterates seen so far, keyed by their integer part."""

    def __init__(self, inst: MipInstance):
        self.inst = inst
        self.seen: set[bytes] = set()
        self.last: Optional[bytes] = None

    def add(self, y) -> None:
        key = self.inst.int_key(y)
        self.seen.add(key)
        self.last = key

    def __contains__(self, y) -> bool:
        return self.inst.int_key(y) in self.seen

    def __len__(self) -> int:
        return len(self.seen)


def detect_cycle(hist: PumpHistory, y) -> str:
    key = hist.inst.int_key(y)
    if hist.last is not None and key == hist.last:
        return ONE_LENGTH
    if key in hist.seen:
        return LONG
    return NO_CYCLE


def rounded(inst: MipInstance, x) -> np.ndarray:
    """Nearest-integer rounding on I, copy on C."""
    y = np.array(x, dtype=float)
    ints = inst.integer
    y[ints] = np.clip(round_half_array(y[ints]), inst.lb[ints], inst.ub[ints])
    return y


def _flip(inst: MipInstance, x_frac, y, j: int) -> None:
    # invert relative to the nearest-integer rounding of x_frac
    v = x_frac[j]
    fl = math.floor(v)
    nearest = fl if v - fl <= 0.5 else fl + 1
    other = fl + 1 if nearest == fl else fl
    y[j] = min(max(other, inst.lb[j]), inst.ub[j])


def _toggle(inst: MipInstance, x_frac, y, j: int) -> None:
    # swap y_j between floor and ceil of x_frac_j
    fl = math.floor(x_frac[j])
    y[j] = min(max(fl + 1 if y[j] == fl else fl, inst.lb[j]), inst.ub[j])


def most_fractional(inst: MipInstance, x, frac) -> np.ndarray:
    """``frac`` sorted by decreasing fractionality, lower index first on ties."""
    frac = np.asarray(frac, dtype=np.int64)
    score = fractionality(np.asarray(x)[frac])
    order = np.lexsort((frac, -score))
    return frac[order]


def perturb_one_length(inst: MipInstance, x_frac, y, T: int, tol: float = INT_TOL) -> np.ndarray:
    """Flip the ``T`` most fractional entries to the opposite integer."""
    y = np.array(y, dtype=float)
    frac = fractional_set(inst, x_frac, tol)
    for j in most_fractional(inst, x_frac, frac)[:max(T, 1)]:
        _flip(inst, x_frac, y, int(j))
    return y


def long_cycle_flip(x: float, rho: float) -> bool:
    fl = math.floor(x)
    nearest = fl if x - fl <= 0.5 else fl + 1
    return abs(x - nearest + max(0.0, rho)) > 0.5


def perturb_long_cycle(inst: MipInstance, x_frac, y, rng, tol: float = INT_TOL,
                       force: bool = True) -> np.ndarray:
    """Random flips driven by rho ~ U(-0.3, 0.7), one draw per fractional variable.

    With ``force`` set, a draw that flips nothing flips the single most
    fractional variable instead.
    """
    y = np.array(y, dtype=float)
    frac = fractional_set(inst, x_frac, tol)
    rho = rng.uniform(-0.3, 0.7, size=frac.size)
    flipped = 0
    for j, r in zip(frac.tolist(), rho.tolist()):
        if long_cycle_flip(x_frac[j], r):
            _flip(inst, x_frac, y, j)
            flipped += 1
    if force and flipped == 0 and frac.size:
        _flip(inst, x_frac, y, int(most_fractional(inst, x_frac, frac)[0]))
    return y


def flip_count(cfg: PumpConfig, n_frac: int) -> int:
    return max(1, math.ceil(cfg.T_fraction * n_frac))


def solve_relaxation(inst: MipInstance, solver, lp_cfg):
    return solver.solve(build_relaxation(inst), lp_cfg)


def relaxation_failure(status: str, started: float) -> HeuristicOutcome:
    if status == INFEASIBLE:
        return fail("relaxation infeasible", 0, started, lp_solves=1)
    if status == UNBOUNDED:
        return fail("relaxation unbounded", 0, started, lp_solves=1)
    return fail(f"relaxation {status}", 0, started, lp_solves=1)


def project(inst: MipInstance, y, cfg_alpha: float, solver, lp_cfg):
    """Solve the L1 projection of ``y``; returns (solution, x part, z part)."""
    sol = solver.solve(build_l1lp(inst, y, cfg_alpha), lp_cfg)
    if not sol.optimal:
        return sol, None, None
    return sol, sol.x[: inst.n], sol.x[inst.n:]


def snapped(inst: MipInstance, x, y) -> np.ndarray:
    """LP point with its integer part replaced by the rounded target."""
    out = np.array(x, dtype=float)
    out[inst.integer] = y[inst.integer]
    return out


def feasibility_pump(inst: MipInstance, cfg: PumpConfig = PumpConfig(), rng=None,
                     solver=None, deadline: Optional[float] = None,
                     history_log: Optional[list] = None) -> HeuristicOutcome:
    started = time.perf_counter()
    rng = rng if rng is not None else np.random.default_rng(0)
    solver = solver or SimplexSolver()
    if expired(deadline):
        return fail("time limit", 0, started)

    relax = solve_relaxation(inst, solver, cfg.lp)
    solves = 1
    if not relax.optimal:
        return relaxation_failure(relax.status, started)
    x = relax.x
    hist = PumpHistory(inst)

    for t in range(1, cfg.maxiter + 1):
        if expired(deadline):
            return fail("time limit", t - 1, started, solves)
        y = rounded(inst, x)
        kind = detect_cycle(hist, y)
        n_frac = fractional_set(inst, x, cfg.int_tol).size
        if n_frac:
            if kind == ONE_LENGTH:
                y = perturb_one_length(inst, x, y, flip_count(cfg, n_frac), cfg.int_tol)
            elif kind == LONG:
                y = perturb_long_cycle(inst, x, y, rng, cfg.int_tol)
            if hist.last is not None and inst.int_key(y) == hist.last:
                frac = fractional_set(inst, x, cfg.int_tol)
                _toggle(inst, x, y, int(most_fractional(inst, x, frac)[0]))
        hist.add(y)
        if history_log is not None:
            history_log.append(y.copy())
        if n_frac == 0:
            # x already lies in Q and matches y on I: zero distance without a solve
            out = succeed(inst, snapped(inst, x, y), t, started, solves)
            if out.success:
                return out

        sol, xs, z = project(inst, y, cfg.alpha, solver, cfg.lp)
        solves += 1
        if xs is None:
            return fail(f"projection {sol.status}", t, started, solves)
        if l1_distance(sol, inst) <= cfg.dist_tol:
            out = succeed(inst, snapped(inst, xs, y), t, started, solves)
            if out.success:
                return out
        x = xs
    return fail("iteration limit", cfg.maxiter, started, solves)

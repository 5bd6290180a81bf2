"""PUSH: a feasibility pump whose rounding step is a lock/slack-aware rounding pass."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .heuristics import HeuristicOutcome, expired, fail, succeed
from .lp import ConfigError, SimplexSolver, SolverConfig, l1_distance
from .model import (
    DOWN,
    FEAS_TOL,
    INT_TOL,
    UP,
    MipInstance,
    fractional_set,
    round_half,
)
from .pump import DIST_TOL, project, relaxation_failure, rounded, snapped, solve_relaxation

# floor for the average residual in feasible_selection
AVG_RES_FLOOR = 1e-9


class PerturbationExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class PushConfig:
    maxiter: int = 250
    rt: float = 0.6
    shrinking_trials: int = 0  # accepted for completeness; not used by the algorithm
    random_sensitivity: float = 0.5
    alpha: float = 0.0
    perturbation_budget: int = 1000
    int_tol: float = INT_TOL
    feas_tol: float = FEAS_TOL
    dist_tol: float = DIST_TOL
    lp: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.maxiter < 1:
            raise ConfigError("maxiter must be at least 1")
        if not 0.0 < self.rt <= 1.0:
            raise ConfigError("rounding threshold must lie in (0, 1]")
        if not 0.0 <= self.random_sensitivity <= 1.0:
            raise ConfigError("random_sensitivity must lie in [0, 1]")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError("alpha must lie in [0, 1)")


class SeenList:
    """Rounded points produced so far in one run, keyed by their integer part."""

    def __init__(self, inst: MipInstance):
        self.inst = inst
        self._keys: set[bytes] = set()

    def add(self, y) -> None:
        self._keys.add(self.inst.int_key(y))

    def __contains__(self, y) -> bool:
        return self.inst.int_key(y) in self._keys

    def __len__(self) -> int:
        return len(self._keys)


class ViolationStats:
    """How often each row was found violated during the run."""

    def __init__(self, m: int):
        self.counts = np.zeros(m, dtype=np.int64)

    def record(self, row: int) -> None:
        self.counts[row] += 1

    def scan_order(self, rng) -> np.ndarray:
        """Rows sampled without replacement with weight 1 + violation count."""
        m = len(self.counts)
        if m == 0:
            return np.zeros(0, dtype=np.int64)
        w = 1.0 + self.counts
        return rng.choice(m, size=m, replace=False, p=w / w.sum())


def _exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def lock_score(inst: MipInstance, j: int, direction: str) -> float:
    """#locks * e^magnitude in the given direction."""
    lk = inst.locks
    up, down = inst.magnitudes
    if direction == UP:
        return float(lk.up[j]) * math.exp(up[j])
    return float(lk.down[j]) * math.exp(down[j])


def scoring_selection(candidates, row: int, inst: MipInstance, x) -> tuple[int, str]:
    idx, vals = inst.row(row)
    slack = float(vals @ np.asarray(x)[idx] - inst.rhs[row])
    coef = dict(zip(idx.tolist(), vals.tolist()))
    eq = bool(inst.is_eq[row])
    best, best_j, best_d = -math.inf, None, None
    for j in sorted(int(j) for j in candidates):
        a = coef[j]
        if (not eq and a > 0) or (eq and np.sign(a) * np.sign(slack) > 0):
            d = DOWN
        else:
            d = UP
        score = lock_score(inst, j, d)
        if score > best:
            best, best_j, best_d = score, j, d
    return best_j, best_d


def simple_rounding_selection(frac, inst: MipInstance, x=None) -> tuple[int, str]:
    lk = inst.locks
    frac = sorted(int(j) for j in frac)
    for j in frac:
        if lk.down[j] == 0 and lk.up[j] > 0:
            return j, UP
        if lk.up[j] == 0 and lk.down[j] > 0:
            return j, DOWN
    j_down = max(frac, key=lambda j: (lock_score(inst, j, DOWN), -j))
    j_up = max(frac, key=lambda j: (lock_score(inst, j, UP), -j))
    if lock_score(inst, j_up, UP) > lock_score(inst, j_down, DOWN):
        return j_up, UP
    return j_down, DOWN


def _avg_residual(res: list) -> Optional[float]:
    if not res:
        return None
    return max(sum(res) / len(res), AVG_RES_FLOOR)


def feasible_selection(x, frac, inst: MipInstance) -> tuple[int, str]:
    """Lock score with the magnitude scaled down by the average slack on each side."""
    lk = inst.locks
    mag_up, mag_down = inst.magnitudes
    V = inst.residuals(x)
    best, best_j, best_d = -math.inf, None, None
    for j in sorted(int(j) for j in frac):
        rows, vals = inst.column(j)
        res_down = [abs(V[i]) for i, a in zip(rows.tolist(), vals.tolist()) if a > 0]
        res_up = [abs(V[i]) for i, a in zip(rows.tolist(), vals.tolist()) if a < 0]
        avg_down, avg_up = _avg_residual(res_down), _avg_residual(res_up)
        e_down = mag_down[j] / avg_down if avg_down is not None else 0.0
        e_up = mag_up[j] / avg_up if avg_up is not None else 0.0
        score_down = lk.down[j] * _exp(e_down) if lk.down[j] else 0.0
        score_up = lk.up[j] * _exp(e_up) if lk.up[j] else 0.0
        if score_down > score_up:
            d, score = DOWN, score_down
        else:
            d, score = UP, score_up
        if score > best:
            best, best_j, best_d = score, j, d
    return best_j, best_d


def push_rounding(inst: MipInstance, x, rt: float, stats: ViolationStats, rng,
                  tol: float = FEAS_TOL, int_tol: float = INT_TOL,
                  log: Optional[list] = None) -> np.ndarray:
    """Round up to round_half(n * rt) fractional integer variables one at a time.

    Entries not reached stay fractional. When ``log`` is a list, one
    ``(variable, direction, rule)`` tuple is appended per rounding.
    """
    x = np.array(x, dtype=float)
    frac = set(fractional_set(inst, x, int_tol).tolist())
    for _ in range(round_half(inst.n * rt)):
        if not frac:
            return x
        V = inst.residuals(x)
        violated = np.where(inst.is_eq, np.abs(V) > tol, V > tol)
        row = None
        if violated.any():
            order = stats.scan_order(rng)
            row = int(order[violated[order]][0])
            stats.record(row)
        if row is not None:
            idx, _ = inst.row(row)
            candidates = frac.intersection(idx.tolist())
            if candidates:
                j, d = scoring_selection(candidates, row, inst, x)
                rule = "scoring"
            else:
                j, d = simple_rounding_selection(frac, inst, x)
                rule = "simple"
        else:
            j, d = feasible_selection(x, frac, inst)
            rule = "feasible"
        x[j] = math.floor(x[j]) if d == DOWN else math.ceil(x[j])
        frac.discard(j)
        if log is not None:
            log.append((j, d, rule))
    return x


def perturbation_box(inst: MipInstance, y, z, frac):
    """Integer sampling box [L, U] for each integer variable."""
    ints = inst.integer
    y_i = np.asarray(y, dtype=float)[ints]
    z_i = np.asarray(z, dtype=float)[ints]
    lo, hi = inst.lb[ints], inst.ub[ints]
    in_frac = np.isin(ints, np.asarray(list(frac), dtype=np.int64))
    L = np.where(in_frac, np.maximum(lo, np.floor(y_i - z_i)), np.maximum(lo, y_i))
    U = np.where(in_frac, np.minimum(hi, np.ceil(y_i + z_i)), np.minimum(hi, y_i))
    return L, U, in_frac


def random_perturbation(inst: MipInstance, y, z, frac, seen: SeenList, sensitivity: float,
                        rng, budget: int = 1000) -> np.ndarray:
    """Resample integer entries inside the box until an unseen point comes up.

    Fractional-origin entries move with probability ``sensitivity``, the
    other integer entries with a tenth of it.
    """
    ints = inst.integer
    L, U, in_frac = perturbation_box(inst, y, z, frac)
    p = np.where(in_frac, sensitivity, sensitivity / 10.0)
    base = np.asarray(y, dtype=float)
    Li, Ui = L.astype(np.int64), U.astype(np.int64)
    for _ in range(budget):
        move = rng.random(len(ints)) < p
        draw = rng.integers(Li, Ui + 1)
        out = base.copy()
        out[ints] = np.where(move, draw, base[ints])
        assert np.all(out[ints] >= np.minimum(L, base[ints])) and np.all(out[ints] <= np.maximum(U, base[ints]))
        if out not in seen:
            return out
    raise PerturbationExhausted("perturbation exhausted")


def push(inst: MipInstance, cfg: PushConfig = PushConfig(), rng=None, solver=None,
         deadline: Optional[float] = None, history_log: Optional[list] = None) -> HeuristicOutcome:
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
    z = np.zeros(inst.n)
    seen = SeenList(inst)
    stats = ViolationStats(inst.m)

    for t in range(1, cfg.maxiter + 1):
        if expired(deadline):
            return fail("time limit", t - 1, started, solves)
        frac = fractional_set(inst, x, cfg.int_tol)
        y = rounded(inst, push_rounding(inst, x, cfg.rt, stats, rng, cfg.feas_tol, cfg.int_tol))
        if y in seen:
            try:
                y = random_perturbation(inst, y, z, frac, seen, cfg.random_sensitivity, rng,
                                        cfg.perturbation_budget)
            except PerturbationExhausted:
                return fail("perturbation exhausted", t, started, solves)
        seen.add(y)
        if history_log is not None:
            history_log.append(y.copy())
        if frac.size == 0 and np.array_equal(y[inst.integer], x[inst.integer].round()):
            out = succeed(inst, snapped(inst, x, y), t, started, solves)
            if out.success:
                return out

        sol, xs, zs = project(inst, y, cfg.alpha, solver, cfg.lp)
        solves += 1
        if xs is None:
            return fail(f"projection {sol.status}", t, started, solves)
        if l1_distance(sol, inst) <= cfg.dist_tol:
            out = succeed(inst, snapped(inst, xs, y), t, started, solves)
            if out.success:
                return out
        x = xs
        z = np.zeros(inst.n)
        z[inst.integer] = zs
    return fail("iteration limit", cfg.maxiter, started, solves)

"""Lock-based rounding heuristics: Simple Rounding, Rounding and Shifting."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    DOWN,
    FEAS_TOL,
    INT_TOL,
    UP,
    MipInstance,
    fractional_set,
    is_lp_feasible,
    is_mip_feasible,
)

SUCCESS = "success"
FAILURE = "failure"


class PreconditionError(ValueError):
    pass


@dataclass
class HeuristicOutcome:
    status: str
    point: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    elapsed: float = 0.0
    reason: Optional[str] = None
    lp_solves: int = 0

    @property
    def success(self) -> bool:
        return self.status == SUCCESS


def succeed(inst: MipInstance, x, iterations: int, started: float,
            lp_solves: int = 0) -> HeuristicOutcome:
    """Success outcome, after an independent feasibility and integrality check."""
    x = np.asarray(x, dtype=float).copy()
    ints = inst.integer
    x[ints] = np.rint(x[ints])
    elapsed = time.perf_counter() - started
    if not is_mip_feasible(inst, x):
        return HeuristicOutcome(FAILURE, iterations=iterations, elapsed=elapsed,
                                reason="verification failed", lp_solves=lp_solves)
    return HeuristicOutcome(SUCCESS, point=x, objective=inst.objective(x),
                            iterations=iterations, elapsed=elapsed, lp_solves=lp_solves)


def fail(reason: str, iterations: int, started: float, lp_solves: int = 0) -> HeuristicOutcome:
    return HeuristicOutcome(FAILURE, iterations=iterations,
                            elapsed=time.perf_counter() - started, reason=reason,
                            lp_solves=lp_solves)


def expired(deadline: Optional[float]) -> bool:
    return deadline is not None and time.perf_counter() >= deadline


class ForbiddenList:
    """Variables that hit a bound while being shifted, banned for ``window`` iterations.

    An entry is also released as soon as the variable moves in the direction
    opposite to the one that was blocked.
    """

    def __init__(self, window: int = 50):
        self.window = window
        self._entries: dict[int, tuple[int, int]] = {}

    def add(self, j: int, iteration: int, blocked: int) -> None:
        self._entries[j] = (iteration + self.window, blocked)

    def is_active(self, j: int, iteration: int) -> bool:
        entry = self._entries.get(j)
        if entry is None:
            return False
        if iteration >= entry[0]:
            del self._entries[j]
            return False
        return True

    def moved(self, j: int, direction: int) -> None:
        entry = self._entries.get(j)
        if entry is not None and direction == -entry[1]:
            del self._entries[j]

    def __contains__(self, j) -> bool:
        return j in self._entries


# ---------------------------------------------------------------------------
# shared selection rules


def trivially_roundable(inst: MipInstance, x, j: int, lk=None) -> Optional[str]:
    lk = lk if lk is not None else inst.locks
    if lk.down[j] == 0:
        return DOWN
    if lk.up[j] == 0:
        return UP
    return None


def select_violated_row(inst: MipInstance, x, tol: float = FEAS_TOL) -> Optional[int]:
    """Row with the largest violation, lowest index on ties; ``None`` if feasible."""
    V = inst.residuals(x)
    viol = np.where(inst.is_eq, np.abs(V), V)
    if viol.size == 0:
        return None
    i = int(np.argmax(viol))
    return i if viol[i] > tol else None


def row_sign(inst: MipInstance, V: float, row: int) -> float:
    """+1 when the row's activity must go down to repair it, -1 when it must go up."""
    if inst.is_eq[row] and V < 0:
        return -1.0
    return 1.0


def rounding_feasible_choice(inst: MipInstance, frac) -> tuple[int, int]:
    """Largest raw lock count over the fractional variables.

    Many up-locks rounds down, many down-locks rounds up; strict ``>`` keeps
    the lowest index on ties.
    """
    lk = inst.locks
    xi_max, j_min, sigma = -1, None, 0
    for j in frac:
        j = int(j)
        if lk.up[j] > xi_max:
            xi_max, sigma, j_min = lk.up[j], -1, j
        if lk.down[j] > xi_max:
            xi_max, sigma, j_min = lk.down[j], 1, j
    return j_min, sigma


def rounding_infeasible_choice(inst: MipInstance, x, frac, row: int):
    """Fewest locks in the repairing direction among the row's fractional variables."""
    lk = inst.locks
    idx, vals = inst.row(row)
    V = float(vals @ np.asarray(x)[idx] - inst.rhs[row])
    s = row_sign(inst, V, row)
    coef = dict(zip(idx.tolist(), (vals * s).tolist()))
    xi_min, j_min, sigma = math.inf, None, 0
    for j in frac:
        j = int(j)
        a = coef.get(j, 0.0)
        if a > 0 and lk.down[j] < xi_min:
            xi_min, sigma, j_min = lk.down[j], -1, j
        if a < 0 and lk.up[j] < xi_min:
            xi_min, sigma, j_min = lk.up[j], 1, j
    return j_min, sigma


def _round(x, j: int, sigma: int) -> None:
    x[j] = math.ceil(x[j]) if sigma == 1 else math.floor(x[j])


def _check_start(inst: MipInstance, x0) -> np.ndarray:
    x = np.array(x0, dtype=float)
    if not is_lp_feasible(inst, x):
        raise PreconditionError("start point is not LP-feasible")
    return x


# ---------------------------------------------------------------------------
# heuristics


def simple_rounding(inst: MipInstance, x0, deadline: Optional[float] = None) -> HeuristicOutcome:
    started = time.perf_counter()
    x = _check_start(inst, x0)
    lk = inst.locks
    steps = 0
    for j in fractional_set(inst, x, INT_TOL):
        if expired(deadline):
            return fail("time limit", steps, started)
        j = int(j)
        direction = trivially_roundable(inst, x, j, lk)
        if direction is None:
            return fail(f"variable {j} is not trivially roundable", steps, started)
        _round(x, j, 1 if direction == UP else -1)
        steps += 1
    return succeed(inst, x, steps, started)


def rounding(inst: MipInstance, x0, deadline: Optional[float] = None,
             extra_budget: int = 1000) -> HeuristicOutcome:
    started = time.perf_counter()
    x = _check_start(inst, x0)
    cap = len(inst.integer) + extra_budget
    it = 0
    while True:
        frac = fractional_set(inst, x, INT_TOL)
        if frac.size == 0:
            break
        if it >= cap:
            return fail("stalled", it, started)
        if expired(deadline):
            return fail("time limit", it, started)
        it += 1
        row = select_violated_row(inst, x)
        if row is None:
            j, sigma = rounding_feasible_choice(inst, frac)
        else:
            j, sigma = rounding_infeasible_choice(inst, x, frac, row)
            if j is None:
                return fail(f"violated row {row} has no fractional variable", it, started)
        _round(x, j, sigma)
    if not is_lp_feasible(inst, x):
        return fail("rounded point is infeasible", it, started)
    return succeed(inst, x, it, started)


def optimal_shift(x_old: float, V: float, a: float, lo: float, hi: float) -> float:
    """Value that zeroes residual ``V`` through coefficient ``a``, clamped to [lo, hi]."""
    return min(max(x_old - V / a, lo), hi)


def shifting(inst: MipInstance, x0, rng=None, deadline: Optional[float] = None,
             window: int = 50, trace: Optional[list] = None) -> HeuristicOutcome:
    """Rounding that may also move integral and continuous variables.

    ``rng`` is accepted for interface symmetry with the LP-based heuristics;
    every choice here is deterministic. When ``trace`` is a list, one
    ``(iteration, variable, kind)`` tuple is appended per step.
    """
    started = time.perf_counter()
    x = _check_start(inst, x0)
    lk = inst.locks
    forbidden = ForbiddenList(window)
    cap = 10 * (len(inst.integer) + inst.m) + 1000
    it = 0
    while True:
        frac = fractional_set(inst, x, INT_TOL)
        row = select_violated_row(inst, x)
        if frac.size == 0 and row is None:
            return succeed(inst, x, it, started)
        if it >= cap:
            return fail("iteration limit", it, started)
        if expired(deadline):
            return fail("time limit", it, started)
        it += 1

        if row is None:
            j, sigma = rounding_feasible_choice(inst, frac)
            _round(x, j, sigma)
            forbidden.moved(j, sigma)
            if trace is not None:
                trace.append((it, j, "round"))
            continue

        idx, vals = inst.row(row)
        V = float(vals @ x[idx] - inst.rhs[row])
        s = row_sign(inst, V, row)
        zeta_min, j, sigma, a_j = math.inf, None, 0, 0.0
        for k, a in zip(idx.tolist(), vals.tolist()):
            if a == 0 or forbidden.is_active(k, it):
                continue
            # move against the coefficient; prefer many locks in the other direction
            if a * s > 0:
                xi, d = lk.up[k], -1
            else:
                xi, d = lk.down[k], 1
            zeta = -1.0 + 1.0 / (xi + 1.0)
            if zeta < zeta_min:
                zeta_min, j, sigma, a_j = zeta, k, d, a
        if j is None:
            return fail("deadlocked", it, started)

        if j in set(frac.tolist()):
            _round(x, j, sigma)
            forbidden.moved(j, sigma)
            kind = "round"
        elif inst.is_integer[j]:
            target = x[j] + sigma
            if target < inst.lb[j] - INT_TOL or target > inst.ub[j] + INT_TOL:
                forbidden.add(j, it, sigma)
                kind = "forbid"
            else:
                x[j] = target
                forbidden.moved(j, sigma)
                kind = "shift"
        else:
            target = optimal_shift(x[j], V, a_j, inst.lb[j], inst.ub[j])
            if abs(target - x[j]) <= 1e-12:
                forbidden.add(j, it, sigma)
                kind = "forbid"
            else:
                forbidden.moved(j, 1 if target > x[j] else -1)
                x[j] = target
                kind = "shift"
        if trace is not None:
            trace.append((it, j, kind))

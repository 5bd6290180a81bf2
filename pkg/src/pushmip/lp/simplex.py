"""Dense two-phase primal simplex with Bland's rule.

Meant for desk-scale programs: the full tableau is kept in memory and every
pivot is a rank-one update. Variables are shifted/reflected/split to be
nonnegative, finite upper bounds become explicit rows, and every row gets a
slack or an artificial so that phase one starts from an identity basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from .program import LinearProgram

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

# entries below this are treated as accumulated round-off, not pivot candidates
_ROUNDOFF = 1e-12


class SimplexBreakdown(ArithmeticError):
    """No usable pivot element above the pivot tolerance."""


@dataclass(frozen=True)
class SolverConfig:
    max_iter: Optional[int] = None  # default 50 * (rows + cols)
    pivot_tol: float = 1e-9
    opt_tol: float = 1e-9
    feas_tol: float = 1e-7


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    iterations: int = 0
    trace: tuple = ()

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class LpSolver(Protocol):
    def solve(self, lp: LinearProgram, cfg: SolverConfig = ...) -> LpSolution:
        ...


class _Unbounded(Exception):
    pass


class _IterationLimit(Exception):
    pass


class _Tableau:
    """Row-reduced tableau ``[B^-1 A | B^-1 b]`` with a reduced-cost row."""

    def __init__(self, T: np.ndarray, basis: np.ndarray, cfg: SolverConfig, budget: int):
        self.T = T
        self.basis = basis
        self.cfg = cfg
        self.budget = budget
        self.pivots = 0
        self.trace: list[tuple[int, int]] = []

    def pivot(self, r: int, k: int) -> None:
        T = self.T
        T[r] /= T[r, k]
        col = T[:, k].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, k] = 0.0
        T[r, k] = 1.0
        self.basis[r] = k
        self.pivots += 1
        self.trace.append((r, k))

    def set_costs(self, c: np.ndarray) -> None:
        """Install cost vector ``c`` (length = number of columns) as reduced costs."""
        m = self.T.shape[0] - 1
        row = np.zeros(self.T.shape[1])
        row[: len(c)] = c
        cb = row[self.basis]
        row -= cb @ self.T[:m]
        self.T[m] = row

    def run(self, ncols: int) -> None:
        """Minimize over columns ``0..ncols-1``."""
        cfg = self.cfg
        T = self.T
        m = T.shape[0] - 1
        while True:
            d = T[m, :ncols]
            eligible = np.flatnonzero(d < -cfg.opt_tol)
            if eligible.size == 0:
                return
            if self.pivots >= self.budget:
                raise _IterationLimit
            ambiguous = False
            for k in eligible:  # Bland: lowest index first
                colk = T[:m, k]
                rows = np.flatnonzero(colk > cfg.pivot_tol)
                if rows.size == 0:
                    if np.any(colk > _ROUNDOFF):
                        ambiguous = True
                        continue
                    raise _Unbounded
                ratios = T[rows, -1] / colk[rows]
                best = ratios.min()
                tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
                r = tied[np.argmin(self.basis[tied])]
                self.pivot(r, k)
                break
            else:
                if ambiguous:
                    raise SimplexBreakdown("pivot candidates all below pivot tolerance")


def _standard_form(lp: LinearProgram):
    """Map x = offset + S s with s >= 0; return pieces for the tableau."""
    n = lp.n
    lb, ub = lp.lb, lp.ub
    cols = []  # (var index, sign)
    offset = np.zeros(n)
    ub_rows = []  # (s column, bound)
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                ub_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    S = np.zeros((n, len(cols)))
    for k, (j, sgn) in enumerate(cols):
        S[j, k] = sgn
    return S, offset, ub_rows


def solve_lp(lp: LinearProgram, cfg: SolverConfig | None = None) -> LpSolution:
    cfg = cfg or SolverConfig()
    S, offset, ub_rows = _standard_form(lp)
    ns = S.shape[1]

    Aub = lp.A_ub.toarray() if lp.A_ub.shape[0] else np.zeros((0, lp.n))
    Aeq = lp.A_eq.toarray() if lp.A_eq.shape[0] else np.zeros((0, lp.n))
    rows_ub = [Aub @ S]
    rhs_ub = [lp.b_ub - Aub @ offset]
    if ub_rows:
        B = np.zeros((len(ub_rows), ns))
        for r, (k, _) in enumerate(ub_rows):
            B[r, k] = 1.0
        rows_ub.append(B)
        rhs_ub.append(np.array([u for _, u in ub_rows]))
    G = np.vstack(rows_ub)
    g = np.concatenate(rhs_ub)
    E = Aeq @ S
    e = lp.b_eq - Aeq @ offset
    m1, m2 = G.shape[0], E.shape[0]
    m = m1 + m2
    cs = lp.c @ S
    cost_offset = float(lp.c @ offset)
    budget = cfg.max_iter if cfg.max_iter is not None else 50 * (lp.m + lp.n)

    if m == 0:
        if np.any(cs < -cfg.opt_tol):
            return LpSolution(UNBOUNDED, None, -np.inf)
        return LpSolution(OPTIMAL, offset.copy(), cost_offset)

    # columns: s (ns) | slacks (m1) | artificials (as needed)
    A = np.zeros((m, ns + m1))
    A[:m1, :ns] = G
    A[:m1, ns:] = np.eye(m1)
    A[m1:, :ns] = E
    rhs = np.concatenate([g, e])
    neg = rhs < 0
    A[neg] *= -1.0
    rhs = np.where(neg, -rhs, rhs)

    basis = np.full(m, -1, dtype=np.int64)
    ok_slack = np.zeros(m, dtype=bool)
    ok_slack[:m1] = ~neg[:m1]
    basis[ok_slack] = ns + np.flatnonzero(ok_slack)
    need = np.flatnonzero(~ok_slack)
    nart = len(need)
    ncols = ns + m1 + nart
    T = np.zeros((m + 1, ncols + 1))
    T[:m, : ns + m1] = A
    for a, r in enumerate(need):
        T[r, ns + m1 + a] = 1.0
        basis[r] = ns + m1 + a
    T[:m, -1] = rhs

    tab = _Tableau(T, basis, cfg, budget)
    try:
        if nart:
            c1 = np.zeros(ncols)
            c1[ns + m1:] = 1.0
            tab.set_costs(c1)
            tab.run(ncols)
            infeas = -tab.T[m, -1]
            if infeas > cfg.feas_tol * max(1.0, float(np.abs(rhs).max())):
                return LpSolution(INFEASIBLE, None, np.nan, tab.pivots)
            _drive_out_artificials(tab, ns + m1, cfg)
            keep = np.ones(tab.T.shape[1], dtype=bool)
            keep[ns + m1: ncols] = False
            tab.T = tab.T[:, keep]
        nreal = ns + m1
        c2 = np.zeros(nreal)
        c2[:ns] = cs
        tab.set_costs(c2)
        tab.run(nreal)
    except _Unbounded:
        return LpSolution(UNBOUNDED, None, -np.inf, tab.pivots)
    except _IterationLimit:
        return LpSolution(ITERATION_LIMIT, None, np.nan, tab.pivots)

    svals = np.zeros(tab.T.shape[1] - 1)
    mm = tab.T.shape[0] - 1
    svals[tab.basis[:mm]] = tab.T[:mm, -1]
    x = np.clip(offset + S @ svals[:ns], lp.lb, lp.ub)
    return LpSolution(OPTIMAL, x, float(lp.c @ x), tab.pivots, tuple(tab.trace))


def _drive_out_artificials(tab: _Tableau, nreal: int, cfg: SolverConfig) -> None:
    """Pivot zero-level artificials out of the basis; drop redundant rows."""
    r = 0
    while r < tab.T.shape[0] - 1:
        if tab.basis[r] < nreal:
            r += 1
            continue
        row = tab.T[r, :nreal]
        cand = np.flatnonzero(np.abs(row) > cfg.pivot_tol)
        if cand.size:
            tab.pivot(r, int(cand[0]))
            r += 1
        else:
            tab.T = np.delete(tab.T, r, axis=0)
            tab.basis = np.delete(tab.basis, r)


class SimplexSolver:
    """Bundled solver; any object with the same ``solve`` signature can replace it."""

    def solve(self, lp: LinearProgram, cfg: SolverConfig | None = None) -> LpSolution:
        return solve_lp(lp, cfg)

"""Problem representation and per-variable / per-row diagnostics.

Every instance is stored in a two-block normal form::

    min  c^T x
    s.t. A x <= b
         D x  = f
         l <= x <= u,   x_j integer for j in I

Row handles are integers into the stacked matrix ``[A; D]``: rows
``0 .. m_ineq-1`` are inequalities, the rest are equalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

INT_TOL = 1e-6
FEAS_TOL = 1e-6
OUTLIER_EPS = 1e-6

UP = "up"
DOWN = "down"


class InstanceError(ValueError):
    """Raised when an instance violates the normal-form invariants."""


@dataclass(frozen=True, eq=False)
class MipInstance:
    name: str
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    D: sp.csr_matrix
    f: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray  # sorted indices of integer variables
    maximize: bool = False  # original sense; c is already negated when set
    obj_constant: float = 0.0
    var_names: Optional[Sequence[str]] = None
    row_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        n = len(self.c)
        if self.A.shape[1] != n or self.D.shape[1] != n:
            raise InstanceError("constraint matrices do not match objective length")
        if len(self.b) != self.A.shape[0] or len(self.f) != self.D.shape[0]:
            raise InstanceError("right-hand side length mismatch")
        if len(self.lb) != n or len(self.ub) != n:
            raise InstanceError("bound vectors do not match objective length")
        if np.any(self.lb > self.ub):
            j = int(np.argmax(self.lb > self.ub))
            raise InstanceError(f"variable {j} has lower bound above upper bound")
        idx = np.asarray(self.integer, dtype=np.int64)
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= n):
            raise InstanceError("integer index set must be sorted, unique and in range")

    @classmethod
    def from_dense(cls, c, A=None, b=None, D=None, f=None, lb=None, ub=None,
                   integer=(), name="instance", maximize=False):
        """Convenience constructor used throughout the tests and the generators.

        ``c`` is taken in the *original* sense; when ``maximize`` is set it is
        negated so the stored problem is a minimization.
        """
        c = np.asarray(c, dtype=float)
        n = len(c)
        A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
        D = np.zeros((0, n)) if D is None else np.atleast_2d(np.asarray(D, dtype=float))
        b = np.zeros(0) if b is None else np.asarray(b, dtype=float)
        f = np.zeros(0) if f is None else np.asarray(f, dtype=float)
        lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
        ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
        integer = np.array(sorted(set(int(j) for j in integer)), dtype=np.int64)
        return normalized(
            name=name,
            c=-c if maximize else c,
            A=sp.csr_matrix(A.reshape(-1, n)),
            b=b,
            D=sp.csr_matrix(D.reshape(-1, n)),
            f=f,
            lb=lb,
            ub=ub,
            integer=integer,
            maximize=maximize,
        )

    # -- sizes ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m_ineq(self) -> int:
        return self.A.shape[0]

    @property
    def m_eq(self) -> int:
        return self.D.shape[0]

    @property
    def m(self) -> int:
        return self.m_ineq + self.m_eq

    @property
    def nnz(self) -> int:
        return int(self.A.nnz + self.D.nnz)

    @cached_property
    def continuous(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.integer] = False
        return np.flatnonzero(mask)

    @cached_property
    def is_integer(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.integer] = True
        return mask

    # -- stacked row view ----------------------------------------------------

    @cached_property
    def M(self) -> sp.csr_matrix:
        """All rows, inequalities first."""
        M = sp.vstack([self.A, self.D], format="csr")
        M.sort_indices()
        return M

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.b, self.f])

    @cached_property
    def is_eq(self) -> np.ndarray:
        return np.arange(self.m) >= self.m_ineq

    @cached_property
    def Mc(self) -> sp.csc_matrix:
        return self.M.tocsc()

    def row(self, i: int):
        """(indices, coefficients) of row ``i``."""
        M = self.M
        lo, hi = M.indptr[i], M.indptr[i + 1]
        return M.indices[lo:hi], M.data[lo:hi]

    def column(self, j: int):
        """(row indices, coefficients) of column ``j``."""
        C = self.Mc
        lo, hi = C.indptr[j], C.indptr[j + 1]
        return C.indices[lo:hi], C.data[lo:hi]

    @cached_property
    def row_absmax(self) -> np.ndarray:
        return np.asarray(abs(self.M).max(axis=1).todense()).ravel() if self.m else np.zeros(0)

    @cached_property
    def locks(self) -> "LocksProfile":
        return locks(self)

    @cached_property
    def magnitudes(self) -> tuple:
        return _magnitudes(self)

    # -- evaluation ----------------------------------------------------------

    def activities(self, x) -> np.ndarray:
        return self.M @ np.asarray(x, dtype=float)

    def residuals(self, x) -> np.ndarray:
        """Signed row residuals V = M x - rhs."""
        return self.activities(x) - self.rhs

    def objective(self, x) -> float:
        """Objective in the internal (minimization) sense."""
        return float(self.c @ np.asarray(x, dtype=float))

    def report_objective(self, x) -> float:
        """Objective in the instance's original sense, constant included."""
        v = self.objective(x)
        return (-v if self.maximize else v) + self.obj_constant

    def int_key(self, x) -> bytes:
        """Hashable key of the integer sub-vector of ``x``."""
        return np.rint(np.asarray(x)[self.integer]).astype(np.int64).tobytes()


def normalized(**kw) -> MipInstance:
    """Build an instance, tightening integer bounds to integral values."""
    lb = np.array(kw["lb"], dtype=float)
    ub = np.array(kw["ub"], dtype=float)
    ints = np.asarray(kw["integer"], dtype=np.int64)
    if ints.size:
        lb[ints] = np.ceil(lb[ints] - INT_TOL)
        ub[ints] = np.floor(ub[ints] + INT_TOL)
    kw["lb"], kw["ub"], kw["integer"] = lb, ub, ints
    kw["c"] = np.asarray(kw["c"], dtype=float)
    kw["b"] = np.asarray(kw["b"], dtype=float)
    kw["f"] = np.asarray(kw["f"], dtype=float)
    return MipInstance(**kw)


def as_point(values) -> np.ndarray:
    x = np.array(values, dtype=float)
    if x.ndim != 1:
        raise ValueError("a point is a flat vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must have finite entries")
    return x


# ---------------------------------------------------------------------------
# rounding and fractionality


def round_half(a: float) -> int:
    """Nearest integer, with an exact .5 going down."""
    fl = math.floor(a)
    return fl if a - fl <= 0.5 else fl + 1


def round_half_array(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    fl = np.floor(a)
    return np.where(a - fl <= 0.5, fl, fl + 1.0)


def fractionality(v) -> np.ndarray:
    """Distance to the nearest integer."""
    v = np.asarray(v, dtype=float)
    return np.abs(v - np.rint(v))


def fractional_set(inst: MipInstance, x, tol: float = INT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    ints = inst.integer
    return ints[fractionality(x[ints]) > tol]


def is_integral(inst: MipInstance, x, tol: float = INT_TOL) -> bool:
    return fractional_set(inst, x, tol).size == 0


# ---------------------------------------------------------------------------
# feasibility


def row_violation(inst: MipInstance, x, row: int) -> float:
    idx, vals = inst.row(row)
    return float(vals @ np.asarray(x, dtype=float)[idx] - inst.rhs[row])


def violated_rows(inst: MipInstance, x, tol: float = FEAS_TOL) -> np.ndarray:
    V = inst.residuals(x)
    bad = np.where(inst.is_eq, np.abs(V) > tol, V > tol)
    return np.flatnonzero(bad)


def is_lp_feasible(inst: MipInstance, x, tol: float = FEAS_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if np.any(x < inst.lb - tol) or np.any(x > inst.ub + tol):
        return False
    return violated_rows(inst, x, tol).size == 0


def is_mip_feasible(inst: MipInstance, x, tol: float = FEAS_TOL,
                    int_tol: float = INT_TOL) -> bool:
    return is_lp_feasible(inst, x, tol) and is_integral(inst, x, int_tol)


# ---------------------------------------------------------------------------
# locks and magnitudes


@dataclass(frozen=True)
class LocksProfile:
    up: np.ndarray
    down: np.ndarray

    def count(self, j: int, direction: str) -> int:
        return int(self.up[j] if direction == UP else self.down[j])


def locks(inst: MipInstance) -> LocksProfile:
    """Up/down lock counts for every variable (continuous ones included).

    A positive coefficient in a <= row up-locks the variable, a negative one
    down-locks it, and any coefficient in an equality locks both ways.
    """
    up = np.zeros(inst.n, dtype=np.int64)
    down = np.zeros(inst.n, dtype=np.int64)
    M = inst.M.tocoo()
    nz = M.data != 0
    rows, cols, vals = M.row[nz], M.col[nz], M.data[nz]
    eq = inst.is_eq[rows]
    np.add.at(up, cols[eq | (vals > 0)], 1)
    np.add.at(down, cols[eq | (vals < 0)], 1)
    return LocksProfile(up=up, down=down)


def locking_mask(inst: MipInstance, rows, vals, direction: str) -> np.ndarray:
    """Which of the given (row, coefficient) entries lock in ``direction``."""
    eq = inst.is_eq[rows]
    if direction == UP:
        return eq | (vals > 0)
    return eq | (vals < 0)


def _magnitudes(inst: MipInstance):
    mag = {}
    for direction in (UP, DOWN):
        out = np.zeros(inst.n)
        for j in range(inst.n):
            rows, vals = inst.column(j)
            keep = locking_mask(inst, rows, vals, direction) & (vals != 0)
            if keep.any():
                out[j] = np.mean(np.abs(vals[keep]) / inst.row_absmax[rows[keep]])
        mag[direction] = out
    return mag[UP], mag[DOWN]


def magnitude(inst: MipInstance, j: int, direction: str) -> float:
    """Mean row-normalized |coefficient| of ``j`` over the rows locking it in ``direction``."""
    up, down = inst.magnitudes
    return float(up[j] if direction == UP else down[j])


# ---------------------------------------------------------------------------
# optimality gap


@dataclass(frozen=True)
class GapReport:
    gap: Optional[float]
    is_outlier: bool
    best_known: float


def optimality_gap(obj: float, best_known: float,
                   outlier_epsilon: float = OUTLIER_EPS) -> GapReport:
    if abs(best_known) < outlier_epsilon:
        return GapReport(gap=None, is_outlier=True, best_known=best_known)
    return GapReport(gap=(obj - best_known) / best_known, is_outlier=False,
                     best_known=best_known)

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..model import MipInstance


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """min c^T v  s.t.  A_ub v <= b_ub,  A_eq v = b_eq,  lb <= v <= ub.

    When built by :func:`build_l1lp` the variables are ``(x, z)``: the first
    ``n_orig`` entries are the MIP variables and ``z`` follows contiguously,
    one entry per integer variable.
    """

    c: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    n_orig: int
    z_for: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]


def build_relaxation(inst: MipInstance) -> LinearProgram:
    return LinearProgram(
        c=inst.c.copy(), A_ub=inst.A, b_ub=inst.b, A_eq=inst.D, b_eq=inst.f,
        lb=inst.lb.copy(), ub=inst.ub.copy(), n_orig=inst.n,
    )


def l1lp_objective(inst: MipInstance, alpha: float) -> np.ndarray:
    """Objective over (x, z): (1-alpha) * sum(z) + alpha * sqrt(|I|)/||c|| * c^T x."""
    if not 0.0 <= alpha < 1.0:
        raise ConfigError(f"alpha must lie in [0, 1), got {alpha}")
    k = len(inst.integer)
    obj = np.zeros(inst.n + k)
    obj[inst.n:] = 1.0 - alpha
    norm = float(np.linalg.norm(inst.c))
    if alpha > 0 and norm > 0:
        obj[: inst.n] = alpha * math.sqrt(k) / norm * inst.c
    else:
        obj[inst.n:] = 1.0
    return obj


def build_l1lp(inst: MipInstance, y, alpha: float = 0.0) -> LinearProgram:
    """L1 projection of ``y`` onto the relaxation polyhedron, linearized with z."""
    y = np.asarray(y, dtype=float)
    obj = l1lp_objective(inst, alpha)
    n, ints = inst.n, inst.integer
    k = len(ints)
    # x_i - z_i <= y_i  and  -x_i - z_i <= -y_i
    r = np.arange(k)
    P = sp.csr_matrix((np.ones(k), (r, ints)), shape=(k, n))
    Z = sp.identity(k, format="csr")
    Aub = sp.vstack([
        sp.hstack([inst.A, sp.csr_matrix((inst.m_ineq, k))]),
        sp.hstack([P, -Z]),
        sp.hstack([-P, -Z]),
    ], format="csr")
    bub = np.concatenate([inst.b, y[ints], -y[ints]])
    Aeq = sp.hstack([inst.D, sp.csr_matrix((inst.m_eq, k))], format="csr")
    return LinearProgram(
        c=obj, A_ub=Aub, b_ub=bub, A_eq=Aeq, b_eq=inst.f.copy(),
        lb=np.concatenate([inst.lb, np.zeros(k)]),
        ub=np.concatenate([inst.ub, np.full(k, np.inf)]),
        n_orig=n, z_for=ints.copy(),
    )


def l1_distance(sol, inst: MipInstance) -> float:
    """Sum of the z block of an L1LP solution."""
    return float(np.sum(sol.x[inst.n:]))

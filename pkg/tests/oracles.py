"""Independent reference implementations used only by the tests.

Nothing here imports solver or heuristic code from the package; the oracles
work on plain dense arrays pulled out of an instance.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def dense(inst):
    """(c, A, b, D, f, lb, ub, I) as dense numpy arrays."""
    return (np.asarray(inst.c, float), inst.A.toarray(), np.asarray(inst.b, float),
            inst.D.toarray(), np.asarray(inst.f, float), np.asarray(inst.lb, float),
            np.asarray(inst.ub, float), [int(j) for j in inst.integer])


def check_feasible(inst, x, tol=1e-6, int_tol=1e-6) -> bool:
    """Row-by-row feasibility and integrality check written with plain loops."""
    _, A, b, D, f, lb, ub, ints = dense(inst)
    x = [float(v) for v in x]
    n = len(x)
    for j in range(n):
        if x[j] < lb[j] - tol or x[j] > ub[j] + tol:
            return False
    for i in range(A.shape[0]):
        if sum(A[i, j] * x[j] for j in range(n)) - b[i] > tol:
            return False
    for i in range(D.shape[0]):
        if abs(sum(D[i, j] * x[j] for j in range(n)) - f[i]) > tol:
            return False
    return all(abs(x[j] - round(x[j])) <= int_tol for j in ints)


def _halfspaces(c, A_ub, b_ub, A_eq, b_eq, lb, ub):
    n = len(c)
    G = [A_ub] if A_ub is not None and len(A_ub) else []
    h = [b_ub] if G else []
    fin_u = np.isfinite(ub)
    fin_l = np.isfinite(lb)
    if fin_u.any():
        G.append(np.eye(n)[fin_u])
        h.append(ub[fin_u])
    if fin_l.any():
        G.append(-np.eye(n)[fin_l])
        h.append(-lb[fin_l])
    G = np.vstack(G) if G else np.zeros((0, n))
    h = np.concatenate(h) if h else np.zeros(0)
    E = A_eq if A_eq is not None and len(A_eq) else np.zeros((0, n))
    e = b_eq if A_eq is not None and len(A_eq) else np.zeros(0)
    return G, h, E, e


def _independent_rows(E, e):
    """Greedy subset of linearly independent equality rows."""
    keep = []
    for i in range(E.shape[0]):
        if np.linalg.matrix_rank(E[keep + [i]]) == len(keep) + 1:
            keep.append(i)
    return E[keep], e[keep]


def vertices(c, A_ub, b_ub, A_eq=None, b_eq=None, lb=None, ub=None, tol=1e-9):
    """All basic feasible points of a bounded polytope, by brute force.

    Every choice of ``n - rank(E)`` inequality rows is made tight together with
    the equalities; nonsingular systems are solved in one batched call.
    """
    n = len(c)
    lb = np.zeros(n) if lb is None else np.asarray(lb, float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, float)
    G, h, E, e = _halfspaces(c, A_ub, b_ub, A_eq, b_eq, lb, ub)
    E0, e0 = E, e
    E, e = _independent_rows(E, e)
    p = E.shape[0]
    k = n - p
    if k < 0:
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(G.shape[0]), k)), dtype=np.int64)
    if combos.size == 0:
        combos = np.zeros((1, 0), dtype=np.int64)
    M = np.empty((len(combos), n, n))
    r = np.empty((len(combos), n))
    M[:, :k, :] = G[combos]
    r[:, :k] = h[combos]
    M[:, k:, :] = E
    r[:, k:] = e
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-9
    if not ok.any():
        return np.zeros((0, n))
    pts = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    scale = 1.0 + np.abs(h).max(initial=0.0)
    feas = np.all(pts @ G.T <= h + tol * scale, axis=1)
    if E0.shape[0]:
        feas &= np.all(np.abs(pts @ E0.T - e0) <= tol * scale, axis=1)
    return pts[feas]


def vertex_optimum(c, A_ub, b_ub, A_eq=None, b_eq=None, lb=None, ub=None):
    """Minimum of c^T x over the enumerated vertices, or None when there are none."""
    V = vertices(c, A_ub, b_ub, A_eq, b_eq, lb, ub)
    if len(V) == 0:
        return None, V
    return float(np.min(V @ c)), V


def brute_force_mip(inst):
    """Every integer point of a box-bounded pure-integer instance, with feasibility."""
    _, A, b, D, f, lb, ub, ints = dense(inst)
    assert len(ints) == len(lb), "pure integer instances only"
    ranges = [range(int(math.ceil(lb[j])), int(math.floor(ub[j])) + 1) for j in range(len(lb))]
    out = []
    for pt in itertools.product(*ranges):
        x = np.array(pt, dtype=float)
        ok = (A @ x <= b + 1e-9).all() and (np.abs(D @ x - f) <= 1e-9).all()
        out.append((x, bool(ok)))
    return out


def l1_oracle(inst, y):
    """min over x in the relaxation of sum_{i in I} |x_i - y_i|.

    Written as x_i - y_i = p_i - q_i with p, q >= 0 (a different linearization
    from the z-block form), solved by HiGHS.
    """
    c, A, b, D, f, lb, ub, ints = dense(inst)
    n, k = len(c), len(ints)
    obj = np.concatenate([np.zeros(n), np.ones(2 * k)])
    A_ub = np.hstack([A, np.zeros((A.shape[0], 2 * k))]) if A.shape[0] else None
    P = np.zeros((k, n))
    P[np.arange(k), ints] = 1.0
    eq_rows = [np.hstack([P, -np.eye(k), np.eye(k)])]
    eq_rhs = [np.asarray(y, float)[ints]]
    if D.shape[0]:
        eq_rows.append(np.hstack([D, np.zeros((D.shape[0], 2 * k))]))
        eq_rhs.append(f)
    bounds = [(lb[j] if np.isfinite(lb[j]) else None, ub[j] if np.isfinite(ub[j]) else None)
              for j in range(n)] + [(0, None)] * (2 * k)
    res = linprog(obj, A_ub=A_ub, b_ub=b if A.shape[0] else None,
                  A_eq=np.vstack(eq_rows), b_eq=np.concatenate(eq_rhs), bounds=bounds,
                  method="highs")
    assert res.status == 0, res.message
    return float(res.fun)


# --- straight-line score formulas -------------------------------------------


def count_locks(A, D):
    """(up, down) lock counts by looping over every nonzero."""
    n = A.shape[1]
    up, down = [0] * n, [0] * n
    for i in range(A.shape[0]):
        for j in range(n):
            if A[i, j] > 0:
                up[j] += 1
            elif A[i, j] < 0:
                down[j] += 1
    for i in range(D.shape[0]):
        for j in range(n):
            if D[i, j] != 0:
                up[j] += 1
                down[j] += 1
    return up, down


def magnitude_of(A, D, j, direction):
    """Mean of |a_ij| / max_k |a_ik| over the rows locking j in ``direction``."""
    terms = []
    for M, eq in ((A, False), (D, True)):
        for i in range(M.shape[0]):
            a = M[i, j]
            if a == 0:
                continue
            locks = eq or (a > 0 if direction == "up" else a < 0)
            if locks:
                terms.append(abs(a) / max(abs(v) for v in M[i]))
    return sum(terms) / len(terms) if terms else 0.0


def _rows(A, b, D, f):
    """[(coefficients, rhs, is_equality)] with inequality rows first."""
    return ([(A[i], b[i], False) for i in range(A.shape[0])]
            + [(D[i], f[i], True) for i in range(D.shape[0])])


def _exp(v):
    # exp saturating to inf; the exponent can be huge next to a tight row
    return math.inf if v > 709 else math.exp(v)


def _score(locks, mag):
    return locks * _exp(mag)


def scoring_oracle(candidates, row, A, b, D, f, x):
    up, down = count_locks(A, D)
    a_row, rhs, eq = _rows(A, b, D, f)[row]
    slack = sum(a_row[k] * x[k] for k in range(len(x))) - rhs
    best = None
    for j in sorted(candidates):
        a = float(a_row[j])
        sign_a = (a > 0) - (a < 0)
        sign_s = (float(slack) > 0) - (float(slack) < 0)
        if (not eq and a > 0) or (eq and sign_a * sign_s > 0):
            d, lk = "down", down[j]
        else:
            d, lk = "up", up[j]
        s = _score(lk, magnitude_of(A, D, j, d))
        if best is None or s > best[0]:
            best = (s, j, d)
    return best[1], best[2]


def simple_selection_oracle(frac, A, D):
    up, down = count_locks(A, D)
    frac = sorted(frac)
    for j in frac:
        if down[j] == 0 and up[j] > 0:
            return j, "up"
        if up[j] == 0 and down[j] > 0:
            return j, "down"
    bu = bd = None
    for j in frac:
        su = _score(up[j], magnitude_of(A, D, j, "up"))
        sd = _score(down[j], magnitude_of(A, D, j, "down"))
        if bu is None or su > bu[0]:
            bu = (su, j)
        if bd is None or sd > bd[0]:
            bd = (sd, j)
    if bu[0] > bd[0]:
        return bu[1], "up"
    return bd[1], "down"


def feasible_selection_oracle(x, frac, A, b, D, f):
    up, down = count_locks(A, D)
    rows = _rows(A, b, D, f)
    resid = [sum(a[k] * x[k] for k in range(len(x))) - r for a, r, _ in rows]
    best = None
    for j in sorted(frac):
        res_down = [abs(resid[i]) for i, (a, _, _) in enumerate(rows) if a[j] > 0]
        res_up = [abs(resid[i]) for i, (a, _, _) in enumerate(rows) if a[j] < 0]
        e_down = e_up = 0.0
        if res_down:
            e_down = magnitude_of(A, D, j, "down") / max(sum(res_down) / len(res_down), 1e-9)
        if res_up:
            e_up = magnitude_of(A, D, j, "up") / max(sum(res_up) / len(res_up), 1e-9)
        s_down = down[j] * _exp(e_down) if down[j] else 0.0
        s_up = up[j] * _exp(e_up) if up[j] else 0.0
        if s_down > s_up:
            d, s = "down", s_down
        else:
            d, s = "up", s_up
        if best is None or s > best[0]:
            best = (s, j, d)
    return best[1], best[2]

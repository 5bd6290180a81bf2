"""Generator for the bundled small-instance suite.

Three families, ten instances each: multi-dimensional binary knapsacks,
weighted set covers, and equality-constrained fixtures (bounded integer
equations and a small facility-location model with continuous flows).
Best-known objectives are computed with an exact MILP solve and frozen in
``best_known.csv`` next to the MPS files.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np

from ..model import MipInstance
from ..mps import write_mps

SUITE_SEED = 20231


def knapsack(rng, k: int) -> MipInstance:
    """Binary multi-knapsack; odd ``k`` adds an exact-cardinality row."""
    n = int(rng.integers(6, 13))
    m = int(rng.integers(1, 4))
    W = rng.integers(1, 20, size=(m, n)).astype(float)
    cap = np.floor(W.sum(axis=1) * rng.uniform(0.3, 0.6, size=m))
    value = rng.integers(1, 30, size=n).astype(float)
    D = f = None
    if k % 2:
        # pick the cardinality from a feasible reference subset
        order = rng.permutation(n)
        chosen = []
        for j in order:
            if np.all(W[:, chosen + [j]].sum(axis=1) <= cap):
                chosen.append(int(j))
        D = np.ones((1, n))
        f = np.array([float(max(1, len(chosen)))])
    return MipInstance.from_dense(
        value, A=W, b=cap, D=D, f=f, lb=np.zeros(n), ub=np.ones(n), integer=range(n),
        name=f"knap{k:02d}", maximize=True,
    )


def set_cover(rng, k: int) -> MipInstance:
    """Weighted set cover; odd ``k`` turns rows covered exactly once by a
    reference cover into partition (equality) rows."""
    n = int(rng.integers(8, 15))
    m = int(rng.integers(6, 11))
    cover = (rng.random((m, n)) < 0.3).astype(float)
    ref = rng.random(n) < 0.4
    if not ref.any():
        ref[rng.integers(n)] = True
    for i in range(m):
        if not (cover[i] * ref).any():
            cover[i, rng.choice(np.flatnonzero(ref))] = 1.0
    cost = rng.integers(1, 10, size=n).astype(float)
    eq = np.zeros(m, dtype=bool)
    if k % 2:
        eq = (cover @ ref.astype(float)) == 1
    return MipInstance.from_dense(
        cost, A=-cover[~eq], b=-np.ones((~eq).sum()), D=cover[eq], f=np.ones(eq.sum()),
        lb=np.zeros(n), ub=np.ones(n), integer=range(n), name=f"cover{k:02d}",
    )


def integer_equations(rng, k: int) -> MipInstance:
    n = int(rng.integers(5, 9))
    p = int(rng.integers(1, 3))
    D = rng.integers(0, 5, size=(p, n)).astype(float)
    D[D.sum(axis=1) == 0, 0] = 1.0
    ub = rng.integers(2, 6, size=n).astype(float)
    x_ref = np.array([rng.integers(0, int(u) + 1) for u in ub], dtype=float)
    f = D @ x_ref
    A = rng.integers(-2, 4, size=(1, n)).astype(float)
    b = A @ x_ref + rng.integers(0, 4, size=1)
    c = rng.integers(-5, 6, size=n).astype(float)
    return MipInstance.from_dense(
        c, A=A, b=b, D=D, f=f, lb=np.zeros(n), ub=ub, integer=range(n),
        name=f"ieq{k:02d}",
    )


def facility(rng, k: int) -> MipInstance:
    nf, nc = 3, int(rng.integers(3, 5))
    fixed = rng.integers(10, 30, size=nf).astype(float)
    ship = rng.integers(1, 10, size=(nf, nc)).astype(float)
    demand = rng.integers(2, 6, size=nc).astype(float)
    capacity = np.full(nf, np.ceil(demand.sum() * rng.uniform(0.5, 0.8)))
    n = nf + nf * nc  # open flags first, then flows x[f, c] as fractions of demand
    c = np.concatenate([fixed, (ship * demand).ravel()])
    D = np.zeros((nc, n))
    for j in range(nc):
        D[j, nf + np.arange(nf) * nc + j] = 1.0
    A = []
    for i in range(nf):
        row = np.zeros(n)
        row[nf + i * nc: nf + (i + 1) * nc] = demand
        row[i] = -capacity[i]
        A.append(row)
        for j in range(nc):
            link = np.zeros(n)
            link[nf + i * nc + j] = 1.0
            link[i] = -1.0
            A.append(link)
    A = np.array(A)
    return MipInstance.from_dense(
        c, A=A, b=np.zeros(len(A)), D=D, f=np.ones(nc), lb=np.zeros(n), ub=np.ones(n),
        integer=range(nf), name=f"facil{k:02d}",
    )


def generate_suite(seed: int = SUITE_SEED) -> list[MipInstance]:
    rng = np.random.default_rng(seed)
    out = [knapsack(rng, k) for k in range(10)]
    out += [set_cover(rng, k) for k in range(10)]
    out += [integer_equations(rng, k) for k in range(6)]
    out += [facility(rng, k) for k in range(4)]
    return out


def best_known_objective(inst: MipInstance) -> float:
    """Exact optimum in the instance's original sense (HiGHS branch and bound)."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    cons = []
    if inst.m_ineq:
        cons.append(LinearConstraint(inst.A, -np.inf, inst.b))
    if inst.m_eq:
        cons.append(LinearConstraint(inst.D, inst.f, inst.f))
    res = milp(inst.c, constraints=cons, integrality=inst.is_integer.astype(int),
               bounds=Bounds(inst.lb, inst.ub))
    if res.status != 0:
        raise RuntimeError(f"{inst.name}: exact solve failed ({res.message})")
    return inst.report_objective(res.x)


def write_suite(outdir, seed: int = SUITE_SEED) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = []
    for inst in generate_suite(seed):
        path = outdir / f"{inst.name}.mps"
        with open(path, "w", encoding="utf-8") as fh:
            write_mps(inst, fh)
        paths.append(path)
        rows.append((inst.name, best_known_objective(inst)))
    with open(outdir / "best_known.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "best_objective"])
        for name, val in rows:
            w.writerow([name, repr(round(float(val), 9))])
    return paths


def bundled_suite_dir() -> Path:
    return Path(str(resources.files("pushmip") / "data" / "suite"))

import math

import numpy as np
import pytest

from pushmip.lp import ConfigError
from pushmip.model import DOWN, UP, MipInstance, fractional_set, round_half
from pushmip.push import (
    PerturbationExhausted,
    PushConfig,
    SeenList,
    ViolationStats,
    feasible_selection,
    perturbation_box,
    push,
    push_rounding,
    random_perturbation,
    scoring_selection,
    simple_rounding_selection,
)

from oracles import (
    brute_force_mip,
    check_feasible,
    feasible_selection_oracle,
    scoring_oracle,
    simple_selection_oracle,
)


def _bin(n, A=None, b=None, D=None, f=None, c=None):
    return MipInstance.from_dense(np.zeros(n) if c is None else c, A=A, b=b, D=D, f=f,
                                  lb=np.zeros(n), ub=np.ones(n), integer=range(n))


def random_fixture(rng, n=6):
    m = int(rng.integers(1, 5))
    p = int(rng.integers(0, 3))
    A = rng.integers(-4, 5, size=(m, n)).astype(float) * (rng.random((m, n)) < 0.6)
    D = rng.integers(-4, 5, size=(p, n)).astype(float) * (rng.random((p, n)) < 0.6)
    b = rng.integers(-2, 6, size=m).astype(float)
    f = rng.integers(-2, 6, size=p).astype(float)
    inst = MipInstance.from_dense(np.zeros(n), A=A, b=b, D=D, f=f, lb=np.zeros(n),
                                  ub=np.full(n, 3.0), integer=range(n))
    x = rng.uniform(0, 3, size=n)
    x[rng.random(n) < 0.3] = rng.integers(0, 4)
    return inst, A, b, D, f, x


# --- selection rules --------------------------------------------------------


def test_scoring_direction_examples():
    inst = _bin(2, A=[[1, -1]], b=[0])
    assert scoring_selection({0}, 0, inst, np.array([0.5, 0.2])) == (0, DOWN)
    assert scoring_selection({1}, 0, inst, np.array([0.5, 0.2])) == (1, UP)


def test_scoring_prefers_larger_product():
    # violated row x0 + x1 <= 0 sends both candidates down.  x0 has two down-locks of
    # relative size 1/2 (magnitude 0.5), x1 three of relative size 1/10 (magnitude 0.1);
    # x2 is a helper column carrying the row maxima.
    inst = MipInstance.from_dense(
        [0, 0, 0],
        A=[[1, 1, 0], [-1, 0, -2], [-1, 0, -2], [0, -1, -10], [0, -1, -10], [0, -1, -10]],
        b=[0, 0, 0, 0, 0, 0], ub=[1, 1, 1], integer=(0, 1))
    assert inst.locks.down[:2].tolist() == [2, 3]
    assert inst.magnitudes[1][:2] == pytest.approx([0.5, 0.1])
    assert 2 * math.exp(0.5) < 3 * math.exp(0.1)
    assert scoring_selection({0, 1}, 0, inst, np.array([0.5, 0.5, 0.0])) == (1, DOWN)


def test_scoring_equality_uses_slack_sign():
    inst = _bin(2, D=[[1, -1]], f=[0])
    # activity 0.3 > 0: positive coefficient goes down, negative goes up
    assert scoring_selection({0}, 0, inst, np.array([0.5, 0.2])) == (0, DOWN)
    assert scoring_selection({1}, 0, inst, np.array([0.5, 0.2])) == (1, UP)
    # activity below the right-hand side flips both
    assert scoring_selection({0}, 0, inst, np.array([0.2, 0.5])) == (0, UP)


def test_simple_rounding_selection_examples():
    inst = _bin(2, A=[[1, 0], [1, -1]], b=[0, 0])   # x0: up 2, down 0
    assert simple_rounding_selection([0, 1], inst) == (0, UP)
    inst = _bin(2, A=[[-1, 0], [-1, 1]], b=[0, 0])  # x0: up 0, down 2
    assert simple_rounding_selection([0, 1], inst) == (0, DOWN)
    free = _bin(3)
    assert simple_rounding_selection([1, 2], free) == (1, DOWN)


def test_simple_rounding_selection_tie_goes_down():
    inst = _bin(2, D=[[1, 1]], f=[1])
    assert simple_rounding_selection([0, 1], inst) == (0, DOWN)


def test_feasible_selection_examples():
    # x <= 10.5 has slack 10 and locks x up; -x <= -0.4 has slack 0.1 and locks x down
    inst = MipInstance.from_dense([0], A=[[1], [-1]], b=[10.5, -0.4], ub=[3], integer=(0,))
    x = np.array([0.5])
    V = inst.residuals(x)
    assert abs(V[0]) == 10.0 and abs(V[1]) == pytest.approx(0.1)
    # down score e^(1/10) (loose row), up score e^(1/0.1) (tight row): rounds up, toward the loose row
    assert feasible_selection(x, [0], inst) == (0, UP)
    assert feasible_selection(np.array([0.5, 0.5]), [1], _bin(2)) == (1, UP)


def test_feasible_selection_equal_scores_up():
    inst = MipInstance.from_dense([0], A=[[1], [-1]], b=[1, 0], ub=[1], integer=(0,))
    assert feasible_selection(np.array([0.5]), [0], inst) == (0, UP)


def test_selection_oracles_random():
    rng = np.random.default_rng(99)
    for _ in range(200):
        inst, A, b, D, f, x = random_fixture(rng)
        frac = fractional_set(inst, x).tolist()
        if not frac:
            continue
        assert simple_rounding_selection(frac, inst, x) == simple_selection_oracle(frac, A, D)
        assert feasible_selection(x, frac, inst) == feasible_selection_oracle(x, frac, A, b, D, f)
        for row in range(inst.m):
            idx, _ = inst.row(row)
            cands = set(frac) & set(idx.tolist())
            if cands:
                assert scoring_selection(cands, row, inst, x) == scoring_oracle(cands, row, A, b, D, f, x)


# --- push_rounding ----------------------------------------------------------


def test_push_rounding_no_fractional():
    inst = _bin(3)
    x = np.array([1.0, 0.0, 1.0])
    assert np.array_equal(push_rounding(inst, x, 0.6, ViolationStats(0), np.random.default_rng(0)), x)


def test_push_rounding_all_feasible_steps():
    inst = _bin(4, A=[[1, 1, 1, 1]], b=[4])
    log = []
    out = push_rounding(inst, np.full(4, 0.5), 1.0, ViolationStats(1), np.random.default_rng(0), log=log)
    assert fractional_set(inst, out).size == 0
    assert [r for _, _, r in log] == ["feasible"] * 4


def test_push_rounding_step_budget():
    inst = _bin(4)
    log = []
    out = push_rounding(inst, np.full(4, 0.5), 0.5, ViolationStats(0), np.random.default_rng(0), log=log)
    assert len(log) == round_half(4 * 0.5) == 2
    assert fractional_set(inst, out).size == 2


def test_push_rounding_dispatch_rules():
    rng = np.random.default_rng(1)
    seen = set()
    for _ in range(100):
        inst, *_, x = random_fixture(rng)
        log = []
        n_frac = fractional_set(inst, x).size
        out = push_rounding(inst, x, 0.6, ViolationStats(inst.m), rng, log=log)
        assert len(log) <= round_half(inst.n * 0.6)
        assert fractional_set(inst, out).size == n_frac - len(log)
        seen.update(r for _, _, r in log)
    assert seen == {"scoring", "simple", "feasible"}


def test_violation_stats_scan_order():
    stats = ViolationStats(4)
    for _ in range(50):
        stats.record(3)
    firsts = [stats.scan_order(np.random.default_rng(s))[0] for s in range(200)]
    assert firsts.count(3) > 150
    order = stats.scan_order(np.random.default_rng(0))
    assert sorted(order.tolist()) == [0, 1, 2, 3]


# --- random_perturbation ----------------------------------------------------


def test_perturbation_box_examples():
    inst = _bin(2)
    L, U, in_frac = perturbation_box(inst, np.array([1.0, 1.0]), np.array([0.6, 0.6]), [0])
    assert (L[0], U[0]) == (0.0, 1.0)
    assert (L[1], U[1]) == (1.0, 1.0)
    assert in_frac.tolist() == [True, False]


def test_random_perturbation_contained():
    inst = MipInstance.from_dense(np.zeros(4), lb=np.zeros(4), ub=np.full(4, 6.0), integer=range(4))
    rng = np.random.default_rng(5)
    seen = SeenList(inst)
    y = np.array([2.0, 3.0, 1.0, 5.0])
    z = np.array([1.5, 0.0, 2.2, 0.7])
    seen.add(y)
    L, U, _ = perturbation_box(inst, y, z, [0, 2, 3])
    for _ in range(500):
        out = random_perturbation(inst, y, z, [0, 2, 3], seen, 0.5, rng)
        assert out not in seen
        assert np.all(out >= L) and np.all(out <= U)
        assert np.array_equal(out, np.round(out))
        assert out[1] == 3.0


def test_random_perturbation_exhausted():
    inst = _bin(2)
    seen = SeenList(inst)
    y = np.array([1.0, 0.0])
    seen.add(y)
    with pytest.raises(PerturbationExhausted, match="perturbation exhausted"):
        random_perturbation(inst, y, np.ones(2), [0, 1], seen, 0.0, np.random.default_rng(0), budget=50)


# --- driver -----------------------------------------------------------------


def test_push_integral_relaxation():
    inst = MipInstance.from_dense([1, 1], A=[[-1, 0], [0, -1]], b=[-1, -2], ub=[3, 3], integer=(0, 1))
    out = push(inst)
    assert out.success and out.iterations == 1


def test_push_knapsack():
    inst = _bin(2, A=[[1, 1]], b=[1], c=[-1, -1])
    out = push(inst)
    feasible = {tuple(x) for x, ok in brute_force_mip(inst) if ok}
    assert out.success and tuple(out.point) in feasible


def test_push_maxiter_one():
    inst = _bin(3, D=[[2, 2, 2]], f=[3.0])
    out = push(inst, PushConfig(maxiter=1))
    assert not out.success and out.iterations == 1


@pytest.mark.parametrize("kw", [dict(rt=0.0), dict(rt=1.2), dict(random_sensitivity=1.5),
                                dict(alpha=1.0), dict(maxiter=0)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        PushConfig(**kw)


def test_push_sound_and_deterministic():
    rng = np.random.default_rng(3)
    for seed in range(20):
        n = 7
        w = rng.integers(1, 9, size=n).astype(float)
        xr = (rng.random(n) < 0.5).astype(float)
        inst = _bin(n, A=[rng.integers(0, 5, size=n)], b=[20.0], D=[w], f=[w @ xr],
                    c=rng.integers(-5, 6, size=n).astype(float))
        log1, log2 = [], []
        a = push(inst, PushConfig(maxiter=40), np.random.default_rng(seed), history_log=log1)
        b = push(inst, PushConfig(maxiter=40), np.random.default_rng(seed), history_log=log2)
        assert (a.status, a.iterations) == (b.status, b.iterations)
        assert len({inst.int_key(y) for y in log1}) == len(log1)
        if a.success:
            assert check_feasible(inst, a.point)

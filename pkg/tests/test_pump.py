import math

import numpy as np
import pytest

from pushmip.lp import ConfigError
from pushmip.model import MipInstance, round_half
from pushmip.pump import (
    LONG,
    NO_CYCLE,
    ONE_LENGTH,
    PumpConfig,
    PumpHistory,
    detect_cycle,
    feasibility_pump,
    flip_count,
    long_cycle_flip,
    most_fractional,
    perturb_long_cycle,
    perturb_one_length,
    rounded,
)

from oracles import brute_force_mip, check_feasible


def _bin(n):
    return MipInstance.from_dense(np.zeros(n), lb=np.zeros(n), ub=np.ones(n), integer=range(n))


# --- cycles -----------------------------------------------------------------


def test_detect_cycle():
    inst = _bin(2)
    h = PumpHistory(inst)
    a, b, c, d = (np.array(v, float) for v in ([0, 0], [1, 0], [0, 1], [1, 1]))
    assert detect_cycle(h, a) == NO_CYCLE
    for p in (a, b, c):
        h.add(p)
    assert detect_cycle(h, c) == ONE_LENGTH
    assert detect_cycle(h, a) == LONG
    assert detect_cycle(h, d) == NO_CYCLE


def test_history_ignores_continuous_part():
    inst = MipInstance.from_dense([0, 0], ub=[1, 5], integer=(0,))
    h = PumpHistory(inst)
    h.add(np.array([1.0, 0.3]))
    assert detect_cycle(h, np.array([1.0, 4.2])) == ONE_LENGTH


def test_one_length_flip_example():
    inst = _bin(1)
    y = perturb_one_length(inst, np.array([0.3]), np.array([0.0]), 1)
    assert y.tolist() == [1.0]


def test_one_length_flips_exactly_t_most_fractional():
    inst = _bin(5)
    x = np.array([0.45, 0.1, 0.5, 0.8, 0.3])
    y = rounded(inst, x)
    out = perturb_one_length(inst, x, y, 2)
    changed = np.flatnonzero(out != y).tolist()
    assert changed == [0, 2]  # fractionalities .45, .1, .5, .2, .3


def test_one_length_t_larger_than_frac():
    inst = _bin(3)
    x = np.array([0.4, 1.0, 0.7])
    y = rounded(inst, x)
    out = perturb_one_length(inst, x, y, 10)
    assert np.flatnonzero(out != y).tolist() == [0, 2]


def test_most_fractional_tie_lower_index():
    inst = _bin(3)
    x = np.array([0.25, 0.75, 0.25])  # exact ties in binary floating point
    assert most_fractional(inst, x, np.array([0, 1, 2])).tolist() == [0, 1, 2]


def test_flip_count():
    cfg = PumpConfig()
    assert flip_count(cfg, 1) == 1
    assert flip_count(cfg, 10) == 1
    assert flip_count(cfg, 11) == 2
    assert flip_count(PumpConfig(T_fraction=0.5), 7) == 4


def test_long_cycle_condition():
    assert long_cycle_flip(0.5, 0.2)
    rng = np.random.default_rng(0)
    for _ in range(2000):
        x = rng.uniform(-3, 3)
        assert not long_cycle_flip(x, -rng.uniform(0, 0.3))


def test_long_cycle_seeded():
    inst = _bin(6)
    x = np.array([0.2, 0.4, 0.5, 0.6, 0.9, 0.35])
    y = rounded(inst, x)
    a = perturb_long_cycle(inst, x, y, np.random.default_rng(4))
    b = perturb_long_cycle(inst, x, y, np.random.default_rng(4))
    assert np.array_equal(a, b)


def test_long_cycle_forced_flip():
    inst = _bin(2)
    x = np.array([0.1, 0.45])

    class NegativeRng:
        def uniform(self, lo, hi, size):
            return np.full(size, -0.2)

    y = rounded(inst, x)
    out = perturb_long_cycle(inst, x, y, NegativeRng())
    assert np.flatnonzero(out != y).tolist() == [1]


def test_flip_clamped_to_bounds():
    inst = MipInstance.from_dense([0], lb=[0], ub=[0.5], integer=(0,))  # ub tightened to 0
    out = perturb_one_length(inst, np.array([0.3]), np.array([0.0]), 1)
    assert out.tolist() == [0.0]


# --- config -----------------------------------------------------------------


@pytest.mark.parametrize("kw", [dict(maxiter=0), dict(alpha=1.0), dict(alpha=-0.1),
                                dict(T_fraction=0.0), dict(T_fraction=1.5)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        PumpConfig(**kw)


# --- driver -----------------------------------------------------------------


def test_integral_relaxation_single_iteration():
    inst = MipInstance.from_dense([1, 1], A=[[-1, 0], [0, -1]], b=[-1, -2], ub=[3, 3], integer=(0, 1))
    out = feasibility_pump(inst)
    assert out.success and out.iterations == 1 and out.lp_solves == 1
    assert out.point.tolist() == [1.0, 2.0]


def test_knapsack_two_binaries():
    inst = MipInstance.from_dense([-1, -1], A=[[1, 1]], b=[1], ub=[1, 1], integer=(0, 1))
    out = feasibility_pump(inst)
    feasible = {tuple(x) for x, ok in brute_force_mip(inst) if ok}
    assert out.success and tuple(out.point) in feasible
    assert out.point.tolist() == [1.0, 0.0]


def test_infeasible_relaxation():
    inst = MipInstance.from_dense([0], A=[[1], [-1]], b=[0, -1], lb=[-np.inf], integer=(0,))
    out = feasibility_pump(inst)
    assert not out.success and out.reason == "relaxation infeasible"


def test_unbounded_relaxation():
    inst = MipInstance.from_dense([-1], lb=[0], integer=(0,))
    assert feasibility_pump(inst).reason == "relaxation unbounded"


def _partition(seed):
    rng = np.random.default_rng(seed)
    n = 7
    w = rng.integers(1, 9, size=n).astype(float)
    x_ref = (rng.random(n) < 0.5).astype(float)
    return MipInstance.from_dense(rng.integers(-5, 6, size=n).astype(float), D=[w], f=[w @ x_ref],
                                  lb=np.zeros(n), ub=np.ones(n), integer=range(n))


def test_pump_sound_and_bounded_solves():
    for seed in range(25):
        inst = _partition(seed)
        log = []
        cfg = PumpConfig(maxiter=40)
        out = feasibility_pump(inst, cfg, np.random.default_rng(seed), history_log=log)
        assert out.lp_solves <= cfg.maxiter + 1
        for y in log:
            assert np.array_equal(y, np.round(y))
            assert np.all(y >= inst.lb) and np.all(y <= inst.ub)
        for a, b in zip(log, log[1:]):
            assert not np.array_equal(a, b)
        if out.success:
            assert check_feasible(inst, out.point)


def test_pump_deterministic():
    inst = _partition(3)
    a = feasibility_pump(inst, PumpConfig(maxiter=30), np.random.default_rng(1))
    b = feasibility_pump(inst, PumpConfig(maxiter=30), np.random.default_rng(1))
    assert (a.status, a.iterations, a.objective) == (b.status, b.iterations, b.objective)


def test_rounded_uses_half_down():
    inst = MipInstance.from_dense([0, 0, 0], ub=[5, 5, 5], integer=(0, 1))
    y = rounded(inst, np.array([0.5, 2.5000001, 1.7]))
    assert y.tolist() == [round_half(0.5), 3.0, 1.7]
    assert math.isclose(y[2], 1.7)

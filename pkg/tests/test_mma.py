"""Subproblem solver checks on analytic toy problems."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cellmat.mma import MMA


def run(mma, x, f_obj, f_con, iters):
    for _ in range(iters):
        x = mma.update(x, f_obj(x), *f_con(x))
    return x


def test_unconstrained_quadratic():
    target = np.array([0.3, 0.8])

    def obj(x):
        return 2.0 * (x - target)

    def con(x):
        return np.array([-1.0]), np.zeros((1, 2))

    mma = MMA(2, 1, 0.0, 1.0)
    x = run(mma, np.array([0.5, 0.5]), obj, con, 50)
    assert_allclose(x, target, atol=1e-4)


def test_active_linear_constraint_kkt():
    # min sum (x-1)^2  s.t.  mean(x) <= 0.4  ->  x = 0.4, lam = 4.8
    n = 4

    def obj(x):
        return 2.0 * (x - 1.0)

    def con(x):
        return np.array([x.mean() - 0.4]), np.full((1, n), 1.0 / n)

    mma = MMA(n, 1, 0.0, 1.0)
    x = run(mma, np.full(n, 0.9), obj, con, 120)
    assert_allclose(x, 0.4, atol=1e-5)
    kkt = obj(x) + mma.lam[0] * con(x)[1][0]
    assert np.abs(kkt).max() < 1e-6
    assert x.mean() - 0.4 < 1e-9


def test_zero_gradient_keeps_iterate():
    n = 5
    x0 = np.linspace(0.2, 0.8, n)
    mma = MMA(n, 1, 0.0, 1.0)
    x = mma.update(x0, np.zeros(n), np.array([-0.5]), np.zeros((1, n)))
    assert_allclose(x, x0, atol=1e-7)


def test_move_limit_respected():
    n = 6
    rng = np.random.default_rng(0)
    x0 = np.full(n, 0.5)
    mma = MMA(n, 1, 0.0, 1.0, move=0.1)
    x = mma.update(x0, rng.normal(size=n) * 100.0,
                   np.array([-1.0]), np.zeros((1, n)))
    assert np.all(np.abs(x - x0) <= 0.1 + 1e-12)


def test_iterates_stay_in_box():
    n = 8
    rng = np.random.default_rng(3)
    mma = MMA(n, 1, 0.2, 0.9)
    x = np.full(n, 0.5)
    for _ in range(20):
        g = rng.normal(size=n) * 10.0
        x = mma.update(x, g, np.array([x.sum() - 4.0]), np.ones((1, n)))
        assert np.all(x >= 0.2 - 1e-12)
        assert np.all(x <= 0.9 + 1e-12)


def test_deterministic():
    def play():
        mma = MMA(3, 1, 0.0, 1.0)
        x = np.array([0.5, 0.4, 0.6])
        out = []
        for k in range(10):
            x = mma.update(x, np.array([1.0, -2.0, 0.5]) * (k + 1),
                           np.array([x.mean() - 0.5]), np.full((1, 3), 1 / 3))
            out.append(x.copy())
        return np.array(out)

    a, b = play(), play()
    assert np.array_equal(a, b)


def test_infeasible_start_recovers():
    # heavily violated constraint: mean(x) <= 0.2 from x = 0.9
    n = 4

    def obj(x):
        return 2.0 * (x - 1.0)

    def con(x):
        return np.array([x.mean() - 0.2]), np.full((1, n), 1.0 / n)

    mma = MMA(n, 1, 0.0, 1.0)
    x = run(mma, np.full(n, 0.9), obj, con, 150)
    assert x.mean() <= 0.2 + 1e-6
    assert_allclose(x, 0.2, atol=1e-4)

"""Random instance generators shared by the unit and acceptance tests."""
import numpy as np

from lowrank_entropy.classical import compose_left_inverse, ibtrick_compose, lemma_bound_p0
from lowrank_entropy.pwlin import Interval, PiecewiseConstantFn, PiecewiseLinearFn, l1_distance, left_inverse

DOM = Interval(0.0, 1.0)


def random_increasing_p1(rng, lo=-0.2, hi=1.2, m=None, v_lo=-0.3, v_hi=1.3):
    m = m or int(rng.integers(3, 9))
    knots = np.sort(np.concatenate([[lo, hi], rng.uniform(lo, hi, m - 2)]))
    incs = rng.uniform(0.05, 1.0, m - 1)
    vals = np.concatenate([[0.0], np.cumsum(incs)])
    vals = v_lo + (v_hi - v_lo) * vals / vals[-1]
    return PiecewiseLinearFn(knots, vals)


def random_steps(rng, n=None, lo=0.05, hi=0.95, min_gap=0.02):
    n = n or int(rng.integers(1, 12))
    while True:
        x = np.sort(rng.uniform(lo, hi, n))
        if n == 1 or np.min(np.diff(x)) >= min_gap:
            break
    c = rng.normal(size=n)
    return x, c


def lemma_instance(rng):
    """(measured L1 error, bound) for one random step sum f, monotone g and perturbed g_eps."""
    x, c = random_steps(rng)
    f = PiecewiseConstantFn(x, np.concatenate([[0.0], np.cumsum(c)]))
    g = random_increasing_p1(rng)
    delta = rng.uniform(0.0, 0.02)
    g_eps = PiecewiseLinearFn(g.knots, g.values + rng.uniform(-delta, delta, g.knots.size))
    centers = np.sort(g_eps(x))
    gap = np.min(np.diff(centers)) if x.size > 1 else 0.2
    eps = rng.uniform(0.05, 0.5) * gap
    measured = l1_distance(compose_left_inverse(f, g, DOM), ibtrick_compose(c, x, eps, g_eps), DOM)
    return measured, lemma_bound_p0(f, eps, g, g_eps, x)


def inverse_bias_instance(rng, n_samples=200):
    """Number of sample points where rho(g^-1(x) - x_k) and rho(x - g(x_k)) disagree."""
    g = random_increasing_p1(rng)
    xk = float(rng.uniform(g.knots[0], g.knots[-1]))
    x = rng.uniform(g.values[0], g.values[-1], n_samples)
    gxk = float(g(xk))
    x = x[np.abs(x - gxk) > 1e-12 * (1 + abs(gxk))]  # the identity is claimed off the step point only
    lhs = (left_inverse(g, x) - xk > 0).astype(float)
    rhs = (x - gxk > 0).astype(float)
    return int(np.sum(lhs != rhs))

"""Independent reference values shared by unit and acceptance tests."""

import math
from fractions import Fraction
from itertools import combinations

import numpy as np

from reachkit.poly import MultiPoly

F = Fraction


def reference_p1_upper(x0, mu, nu, t):
    """Double-integrator upper parabola in closed form, in variables x1, x2."""
    x1, x2 = MultiPoly.generators(("x1", "x2"))
    u = (x2 - x0[1] - nu * t) * (1 / mu) + t
    v = (x1 - x0[0] - t * x0[1] - nu * t ** 2 / 2) * (1 / mu)
    return u * u * F(1, 4) - v - t ** 2 / 2


def reference_p2_upper(x0, mu, nu, t):
    """Triple-integrator upper quartic in closed form, in variables x1, x2, x3."""
    x1, x2, x3 = MultiPoly.generators(("x1", "x2", "x3"))
    a = (x3 - x0[2] - nu * t) * (1 / mu) - t
    b = (x2 - x0[1] - t * x0[2] - nu * t ** 2 / 2) * (1 / mu) - t ** 2 / 2
    c = (x1 - x0[0] - t * x0[1] - t ** 2 / 2 * x0[2] - nu * t ** 3 / 6) * (1 / mu) - t ** 3 / 6
    return a ** 4 * F(1, 16) + b * b * 3 - c * a * 6


def nested_sums(r, N):
    """``S(n) = sum_{0 <= i_1 < ... < i_r <= n} prod_{a<b} (i_b - i_a)`` for n = 0..N.

    Brute force: every tuple is enumerated once and binned by its top index.
    """
    by_top = [0] * (N + 1)
    for ks in combinations(range(N + 1), r):
        prod = 1
        for a in range(r):
            for b in range(a + 1, r):
                prod *= ks[b] - ks[a]
        by_top[ks[-1]] += prod
    out, acc = [], 0
    for v in by_top:
        acc += v
        out.append(acc)
    return out


def leading_coefficient(values, degree):
    """Exact leading coefficient of the polynomial through ``(n, values[n])``.

    Newton forward differences: the ``degree``-th difference of a degree
    ``degree`` polynomial on consecutive integers is ``degree! * lead``.
    """
    diff = [F(v) for v in values]
    for _ in range(degree):
        diff = [b - a for a, b in zip(diff, diff[1:])]
    assert all(v == diff[0] for v in diff), "sequence is not a polynomial of this degree"
    return diff[0] / math.factorial(degree)


def vandermonde_integral_mc(r, samples, seed):
    """Monte Carlo mean of ``prod_{a<b} |y_a - y_b|`` over the unit cube."""
    rng = np.random.default_rng(seed)
    Y = rng.random((samples, r))
    prod = np.ones(samples)
    for a in range(r):
        for b in range(a + 1, r):
            prod *= np.abs(Y[:, a] - Y[:, b])
    return prod.mean(), prod.std(ddof=1) / math.sqrt(samples)


def sphere_max_width(spec, width_fn, samples, seed):
    """Largest width over random unit directions followed by local refinement."""
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(samples, spec.d))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    vals = np.array([width_fn(y) for y in Y])
    best = Y[np.argmax(vals)]
    res = minimize(lambda v: -width_fn(v / np.linalg.norm(v)), best, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    y = res.x / np.linalg.norm(res.x)
    return max(vals.max(), width_fn(y)), y

"""Acceptance suite: eleven end-to-end criteria at their stated tolerances.

Each ``criterion_N`` returns ``(ok, detail)``. Under pytest every one is a
test and a PASS/FAIL line per criterion is printed in the terminal summary;
``python tests/test_acceptance.py`` prints the same lines directly.
"""

import math
import random
import sys
import time
import timeit
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.insert(0, str(Path(__file__).parent))

from oracles import leading_coefficient, nested_sums, reference_p1_upper, reference_p2_upper  # noqa: E402
from reachkit.boundary import (  # noqa: E402
    _implicit,
    bounding_polynomials,
    contains,
    implicit_degree,
    implicitize,
    line_intersection_count,
    parametric_rho,
    rho_names,
)
from reachkit.compare import bounding_box, hausdorff_p, monte_carlo_volume, zonotope_approximant, zonotope_volume  # noqa: E402
from reachkit.core import ReachSpec, free_response, xi  # noqa: E402
from reachkit.poly import MultiPoly  # noqa: E402
from reachkit.size import (  # noqa: E402
    angles_from_unit,
    asymptotics,
    critical_time,
    diameter,
    diameter_maximizers,
    single_chain,
    vandermonde_constant,
    volume,
)
from reachkit.support import support_box, width  # noqa: E402

F = Fraction
RESULTS = {}


def record(n, title):
    def wrap(fn):
        def run():
            start = time.perf_counter()
            ok, detail = fn()
            RESULTS[n] = (title, ok, f"{detail} [{time.perf_counter() - start:.1f}s]")
            return ok, detail

        run.__name__ = fn.__name__
        return run

    return wrap


# 1 ---------------------------------------------------------------------------


@record(1, "volume exactness")
def criterion_1():
    ok = True
    for t in (F(1), F(1, 2), F(7, 3), F(4)):
        ok &= volume(ReachSpec.create((2,), mu=1, t=t), exact=True) == F(2, 3) * t ** 3
    spec = ReachSpec.create((2, 1), mu=(5, 3), t=4)
    v = volume(spec, exact=True)
    ok &= v == 25600 and volume(spec) == 25600.0
    per_call = min(timeit.repeat(lambda: volume(spec), number=200, repeat=5)) / 200
    ok &= per_call < 1e-3
    return ok, f"vol(2,1)={v}, {per_call * 1e6:.0f} us per call"


# 2 ---------------------------------------------------------------------------


@record(2, "implicitization ground truth")
def criterion_2():
    _implicit.cache_clear()
    start = time.perf_counter()
    p2, p3 = implicitize(2), implicitize(3)
    elapsed = time.perf_counter() - start
    r1, r2 = MultiPoly.generators(rho_names(2))
    ok = p2 == r2 ** 2 - r1
    r1, r2, r3 = MultiPoly.generators(rho_names(3))
    ok &= p3 == r3 ** 4 - r3 * r1 * 4 + r2 ** 2 * 3
    ok &= elapsed < 1.0
    notes = [f"r=2,3 built in {elapsed * 1e3:.1f} ms"]
    rng = random.Random(2024)
    for r in (4, 5, 6):
        wp = implicitize(r)
        delta = (r - 1) // 2
        bad = 0
        for _ in range(10 ** 4):
            s = sorted(F(rng.randint(0, 999), rng.randint(1, 999)) for _ in range(r - 1))
            bad += wp(*parametric_rho(s, r)) != 0
        deg_ok = wp.total_degree() == (delta + 1) * (r - delta)
        ok &= bad == 0 and deg_ok
        notes.append(f"r={r}: deg {wp.total_degree()}, {bad} nonzero of 1e4")
    return ok, "; ".join(notes)


# 3 ---------------------------------------------------------------------------


def _positive_multiple(p, q):
    lead = max(q.terms)
    c = p.terms.get(lead, 0) / q.terms[lead]
    return c > 0 and p == q * c, c


@record(3, "composed boundary polynomials")
def criterion_3():
    rng = random.Random(3)
    q = lambda: F(rng.randint(-20, 20), rng.randint(1, 7))
    ok, scales = True, set()
    for _ in range(10):
        alpha = q()
        beta = alpha + F(rng.randint(1, 20), rng.randint(1, 7))
        mu, nu = (beta - alpha) / 2, (beta + alpha) / 2
        t = F(rng.randint(1, 20), rng.randint(1, 5))
        x0 = (q(), q(), q())
        pu, _ = bounding_polynomials(ReachSpec.create((2,), alpha=(alpha,), beta=(beta,), x0=x0[:2], t=t), 0)
        good, c = _positive_multiple(pu, reference_p1_upper(x0[:2], mu, nu, t))
        ok &= good
        scales.add(c)
        pu, _ = bounding_polynomials(ReachSpec.create((3,), alpha=(alpha,), beta=(beta,), x0=x0, t=t), 0)
        good, c = _positive_multiple(pu, reference_p2_upper(x0, mu, nu, t))
        ok &= good
        scales.add(c)
    return ok, f"10 random rational specs per dimension, scales {sorted(scales)}"


# 4 ---------------------------------------------------------------------------


def _sphere_search(spec, samples, rng):
    from scipy.optimize import minimize

    def w(v):
        return width(spec, v / np.linalg.norm(v)).value

    Y = rng.normal(size=(samples, spec.d))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    vals = np.array([w(y) for y in Y])
    res = minimize(lambda v: -w(v), Y[np.argmax(vals)], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 5000})
    y = res.x / np.linalg.norm(res.x)
    return max(vals.max(), w(y)), y


def _angle_gap(a, b):
    dphi = abs((a[0] - b[0] + math.pi) % (2 * math.pi) - math.pi)
    return max(dphi, abs(a[1] - b[1]))


@record(4, "diameter")
def criterion_4():
    rng = np.random.default_rng(4)
    ok, worst, worst_angle = True, 0.0, 0.0
    for r in (2, 3, 4):
        for t in (0.5, 1.0, 2.1):
            spec = ReachSpec.create((r,), mu=1, t=t)
            closed = diameter(spec).value
            found, y = _sphere_search(spec, 600, rng)
            rel = abs(found - closed) / closed
            worst = max(worst, rel)
            ok &= rel <= 1e-6
            if r == 3:
                gap = min(_angle_gap(angles_from_unit(s * y), m) for s in (1, -1) for m in diameter_maximizers(spec))
                worst_angle = max(worst_angle, gap)
                ok &= gap <= 1e-3
    return ok, f"max rel gap {worst:.2e}, max angle gap {worst_angle:.2e} rad"


# 5 ---------------------------------------------------------------------------


@record(5, "critical times")
def criterion_5():
    a, b = critical_time(3, 2, 1), critical_time(4, 3, 1)
    ok = abs(a - 30 ** (1 / 3)) <= 1e-12 and abs(b - 420 ** (1 / 4)) <= 1e-12
    ok &= round(a, 4) == 3.1072 and round(b, 4) == 4.5270
    worst = 0.0
    for d, dp in ((3, 2), (4, 3), (5, 3), (6, 1)):
        tc = critical_time(d, dp, 1)
        v1, v2 = volume(single_chain(d, 1, tc)), volume(single_chain(dp, 1, tc))
        worst = max(worst, abs(v1 - v2) / v2)
    ok &= worst <= 1e-12
    return ok, f"t_cr = {a:.4f}, {b:.4f}; max crossing mismatch {worst:.1e}"


# 6 ---------------------------------------------------------------------------


@record(6, "diameter limit")
def criterion_6():
    lim = asymptotics("diameter_d_to_inf", mu=1, t=1)
    ds = [diameter(single_chain(d, 1, 1)).value for d in range(1, 31)]
    # increments fall below double precision near d = 11, so strict growth
    # is checked on the exact squared diameters 4 sum_k (1/k!)^2
    exact = [4 * sum(F(1, math.factorial(k) ** 2) for k in range(1, d + 1)) for d in range(1, 31)]
    strict = all(b > a for a, b in zip(exact, exact[1:]))
    mono = strict and all(b >= a for a, b in zip(ds, ds[1:]))
    mono &= all(abs(math.sqrt(e) - v) <= 1e-15 * v for e, v in zip(exact, ds))
    gap = abs(ds[-1] - lim)
    return mono and gap < 1e-9, f"monotone={mono}, |diam(30) - limit| = {gap:.1e}"


# 7 ---------------------------------------------------------------------------


@record(7, "volume convergence oracle")
def criterion_7():
    start = time.perf_counter()
    ok, notes = True, []
    for r, bound in (((2,), 1e-3), ((3,), 5e-3), ((2, 1), 5e-3)):
        spec = ReachSpec.create(r, mu=1, t=1)
        exact = volume(spec)
        rel = abs(zonotope_volume(zonotope_approximant(spec, 4096)) - exact) / exact
        est, se = monte_carlo_volume(spec, 10 ** 6, seed=0)
        z = (est - exact) / se
        ok &= rel < bound and abs(z) < 3
        notes.append(f"r={r}: zono rel {rel:.1e}, MC z={z:+.2f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    return ok, "; ".join(notes)


# 8 ---------------------------------------------------------------------------


@record(8, "c(r) oracle")
def criterion_8():
    ok, notes = True, []
    for r in (2, 3, 4):
        lead = leading_coefficient(nested_sums(r, 60)[1:], r * (r + 1) // 2)
        ok &= lead == vandermonde_constant(r)
        notes.append(f"c({r}) = {lead}")
    return ok, ", ".join(notes)


# 9 ---------------------------------------------------------------------------


@record(9, "Hausdorff")
def criterion_9():
    ok, notes = True, []
    single = ReachSpec.create((3,), mu=1, t=1.5)
    zeros = [hausdorff_p(single, p).distance for p in (0.5, 1, 2, 4, math.inf)]
    pair = ReachSpec.create((2, 3), mu=1, t=1.5)
    ladder = [hausdorff_p(pair, p).distance for p in (0.5, 1, 2, 4, math.inf)]
    ok &= max(zeros) < 1e-10 and ladder[-1] < 1e-10
    ok &= all(b <= a + 1e-10 for a, b in zip(ladder, ladder[1:]))
    two = hausdorff_p(ReachSpec.create((1, 1), mu=1, t=1), 2).distance
    ok &= abs(two - (math.sqrt(2) - 1)) <= 1e-6
    notes.append(f"m=1 max {max(zeros):.1e}")
    notes.append("r=(2,3) ladder " + ", ".join(f"{v:.5f}" for v in ladder))
    notes.append(f"r=(1,1) p=2 error {abs(two - (math.sqrt(2) - 1)):.1e}")
    return ok, "; ".join(notes)


# 10 --------------------------------------------------------------------------


def _interior_points(spec, k, rng):
    lo, hi = bounding_box(spec)
    out = []
    while len(out) < k:
        x = lo + (hi - lo) * rng.random(spec.d)
        if contains(spec, x) == "inside":
            out.append(x)
    return out


def line_counts(d, lines=100, seed=10):
    spec = ReachSpec.create((d,), mu=1, t=1.5)
    rng = np.random.default_rng(seed)
    counts, resampled = [], 0
    for k, x in enumerate(_interior_points(spec, lines, rng)):
        c, extra = line_intersection_count(spec, x, trials=1, seed=seed * 1000 + k)
        counts.extend(c)
        resampled += extra
    return counts, resampled


@record(10, "taxonomy diagnostic")
def criterion_10():
    ok, notes = True, []
    for d, want in ((2, 4), (3, 6)):
        counts, resampled = line_counts(d)
        hits = counts.count(want)
        hist = {c: counts.count(c) for c in sorted(set(counts))}
        ok &= hits >= 95
        notes.append(f"d={d}: {hits}/100 lines give {want}, histogram {hist}, {resampled} resampled")
    return ok, "; ".join(notes)


# 11 --------------------------------------------------------------------------


def _random_spec(rng):
    r = []
    while True:
        r.append(int(rng.integers(1, 5)))
        if sum(r) > 6:
            r.pop()
            break
        if rng.random() < 0.4:
            break
    m = len(r)
    alpha = rng.uniform(-3, 1, m)
    beta = alpha + rng.uniform(0.1, 3, m)
    x0 = rng.uniform(-2, 2, sum(r))
    return ReachSpec.create(tuple(r), alpha=tuple(alpha), beta=tuple(beta), x0=tuple(x0), t=float(rng.uniform(0.1, 3)))


def _quad_support(spec, y):
    lo, hi = np.array(spec.input.alpha, float), np.array(spec.input.beta, float)
    blocks = spec.blocks()

    def f(s):
        v = xi(spec, s)
        p = np.array([y[sl] @ v[sl] for sl in blocks])
        return float(np.sum(np.maximum(lo * p, hi * p)))

    pts = set()
    for sl, rj in zip(blocks, spec.r):
        c = [y[sl][k] / math.factorial(rj - 1 - k) for k in range(rj)]
        if rj > 1 and np.any(c[:-1]):
            pts.update(z.real for z in np.roots(c) if abs(z.imag) < 1e-9 and 0 < z.real < spec.t)
    val, _ = quad(f, 0, float(spec.t), points=sorted(pts) or None, epsabs=1e-12, epsrel=1e-12, limit=500)
    return float(y @ free_response(spec)) + val


@record(11, "support-function properties")
def criterion_11():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    fails = {"homogeneity": 0, "subadditivity": 0, "blocks": 0, "quadrature": 0}
    worst_quad = 0.0
    for _ in range(1000):
        spec = _random_spec(rng)
        y1, y2 = rng.normal(size=spec.d), rng.normal(size=spec.d)
        h = lambda y: support_box(spec, y, argmax=False).value
        h1, h2 = h(y1), h(y2)
        c = float(rng.uniform(0.01, 50))
        if abs(h(c * y1) - c * h1) > 1e-12 * max(1.0, abs(c * h1)):
            fails["homogeneity"] += 1
        if h(y1 + y2) > h1 + h2 + 1e-12 * (1 + abs(h1) + abs(h2)):
            fails["subadditivity"] += 1
        parts = sum(support_box(spec.block_spec(j), y1[sl], argmax=False).value for j, sl in enumerate(spec.blocks()))
        if abs(parts - h1) > 1e-12 * max(1.0, abs(h1)):
            fails["blocks"] += 1
        gap = abs(_quad_support(spec, y1) - h1)
        worst_quad = max(worst_quad, gap / max(1.0, abs(h1)))
        if gap > 1e-9 * max(1.0, abs(h1)):
            fails["quadrature"] += 1
    elapsed = time.perf_counter() - start
    ok = not any(fails.values()) and elapsed < 30
    return ok, f"failures {fails}, worst quadrature gap {worst_quad:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{k:02d}" for k in range(1, 12)])
def test_criterion(fn):
    ok, detail = fn()
    assert ok, detail


def summary_lines():
    return [f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
            for n, (title, ok, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    for fn in CRITERIA:
        fn()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for _, ok, _ in RESULTS.values()) else 1)

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reachkit.core import ReachSpec
from reachkit.errors import CapabilityError, ValidationError
from reachkit.size import (
    angles_from_unit,
    asymptotics,
    bessel_i0,
    block_volumes,
    critical_time,
    diameter,
    diameter_maximizers,
    single_chain,
    size_curve,
    size_report,
    unit_from_angles,
    vandermonde_constant,
    volume,
    volume_lower_bound,
    width_map,
)
from reachkit.support import width

from oracles import leading_coefficient, nested_sums, vandermonde_integral_mc
from strategies import specs, unit_vectors

F = Fraction


def test_volume_examples():
    t = F(7, 3)
    assert volume(ReachSpec.create((2,), mu=1, t=t), exact=True) == F(2, 3) * t ** 3
    assert volume(ReachSpec.create((2, 1), mu=(5, 3), t=4), exact=True) == 25600
    assert volume(ReachSpec.create((1,), mu=F(5, 2), t=3), exact=True) == 15
    assert volume(ReachSpec.create((2, 1), mu=(5, 3), t=4)) == 25600.0


@given(specs())
def test_product_law(spec):
    parts = [volume(spec.block_spec(j), exact=True) for j in range(spec.m)]
    assert volume(spec, exact=True) == math.prod(parts)
    assert block_volumes(spec, exact=True) == parts


@given(specs(), st.lists(st.floats(-5, 5), min_size=32, max_size=32))
def test_translation_invariance(spec, shift):
    moved = spec.with_x0(tuple(np.array(spec.x0) + shift[: spec.d]))
    assert volume(moved, exact=True) == volume(spec, exact=True)
    assert diameter(moved).value == diameter(spec).value


@given(specs(), st.floats(0.1, 3), st.floats(0.1, 3))
def test_monotone_in_time(spec, a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert volume(spec.with_t(lo)) < volume(spec.with_t(hi))
    assert diameter(spec.with_t(lo)).value < diameter(spec.with_t(hi)).value


@pytest.mark.parametrize("r", [2, 3, 4])
def test_vandermonde_constant_brute_force(r):
    sums = nested_sums(r, 60)
    assert leading_coefficient(sums[1:], r * (r + 1) // 2) == vandermonde_constant(r)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_vandermonde_constant_cube_integral(r):
    mean, se = vandermonde_integral_mc(r, 400_000, seed=r)
    assert abs(mean - math.factorial(r) * float(vandermonde_constant(r))) < 3 * se


def test_volume_lower_bound():
    spec = ReachSpec.create((2,), mu=1, t=1)
    assert volume_lower_bound(spec, 0) == pytest.approx(volume(spec), rel=1e-12)
    assert volume_lower_bound(spec, 1) == pytest.approx((1 + math.sqrt(2 / 3)) ** 2, rel=1e-12)
    vals = [volume_lower_bound(spec, v) for v in (0, 0.5, 1, 4)]
    assert vals == sorted(vals)
    with pytest.raises(ValidationError):
        volume_lower_bound(spec, -1)


def test_diameter_examples():
    t = 1.9
    d3 = diameter(ReachSpec.create((3,), mu=1, t=t)).value
    assert d3 == pytest.approx(t / 3 * math.sqrt(t ** 4 + 9 * t ** 2 + 36), rel=1e-14)
    assert diameter(ReachSpec.create((1,), mu=2.5, t=3)).value == pytest.approx(15)
    assert diameter(ReachSpec.create((2,), mu=1, t=1)).value == pytest.approx(math.sqrt(5), rel=1e-15)


def test_diameter_degenerate():
    res = diameter(ReachSpec.create((2,), alpha=(1,), beta=(1,), t=1))
    assert res.degenerate and res.value == 0


@given(specs().flatmap(lambda s: st.tuples(st.just(s), unit_vectors(s.d))))
def test_diameter_dominates_width(case):
    spec, eta = case
    dia = diameter(spec)
    assert width(spec, eta).value <= dia.value * (1 + 1e-12)
    assert width(spec, dia.direction).value == pytest.approx(dia.value, rel=1e-10)


@pytest.mark.parametrize("d", [1, 2, 5, 12])
def test_diameter_partial_sum(d):
    t, mu = 1.3, 0.7
    series = 2 * mu * math.sqrt(sum((t ** j / math.factorial(j)) ** 2 for j in range(1, d + 1)))
    assert diameter(single_chain(d, mu, t)).value == pytest.approx(series, rel=1e-14)


def test_maximizer_angles():
    t = 2.1
    spec = ReachSpec.create((3,), mu=1, t=t)
    (p1, th1), (p2, th2) = diameter_maximizers(spec)
    u1, u2 = unit_from_angles(p1, th1), unit_from_angles(p2, th2)
    assert np.allclose(u1, -u2)
    dia = diameter(spec).value
    assert width(spec, u1).value == pytest.approx(dia, rel=1e-10)
    assert width(spec, u2).value == pytest.approx(dia, rel=1e-10)
    with pytest.raises(CapabilityError):
        diameter_maximizers(ReachSpec.create((2,), t=1))


def test_maximizer_grid_oracle():
    # exhaustive angle grid, refined around its best cell
    t = 2.1
    spec = ReachSpec.create((3,), mu=1, t=t)
    z = np.array([t ** 3 / 6, t ** 2 / 2, t])
    w = lambda p, th: 2 * abs(unit_from_angles(p, th) @ z)  # width is linear on this set
    phi = np.linspace(0, 2 * np.pi, 2000)
    theta = np.linspace(0, np.pi, 2000)
    P, T = np.meshgrid(phi, theta, indexing="ij")
    W = 2 * np.abs(np.sin(T) * np.cos(P) * z[0] + np.sin(T) * np.sin(P) * z[1] + np.cos(T) * z[2])
    i, k = np.unravel_index(np.argmax(W), W.shape)
    best = (phi[i], theta[k])
    got = diameter_maximizers(spec)
    assert min(max(abs(best[0] - a), abs(best[1] - b)) for a, b in got) < 1e-3
    assert w(*best) <= diameter(spec).value + 1e-12


def test_angles_roundtrip():
    u = unit_from_angles(0.7, 1.1)
    assert np.allclose(angles_from_unit(u), (0.7, 1.1))


def test_width_map_shape():
    phi, theta, W = width_map(ReachSpec.create((3,), mu=1, t=1), n_phi=5, n_theta=8)
    assert W.shape == (5, 8)
    assert W.max() <= diameter(ReachSpec.create((3,), mu=1, t=1)).value + 1e-12
    with pytest.raises(CapabilityError):
        width_map(ReachSpec.create((2,), t=1))


def test_critical_times():
    assert critical_time(3, 2, 1) == pytest.approx(30 ** (1 / 3), rel=1e-12)
    assert critical_time(4, 3, 1) == pytest.approx(420 ** (1 / 4), rel=1e-12)
    assert round(critical_time(3, 2, 1), 4) == 3.1072
    assert round(critical_time(4, 3, 1), 4) == 4.5270


@pytest.mark.parametrize("d, dp, mu", [(3, 2, 1), (4, 3, 1), (5, 2, 0.5), (9, 4, 3.0), (30, 29, 1.0)])
def test_volumes_cross(d, dp, mu):
    tc = critical_time(d, dp, mu)
    v = lambda k, t: volume(single_chain(k, mu, t))
    assert v(d, tc) == pytest.approx(v(dp, tc), rel=1e-12)
    assert v(d, tc * (1 - 1e-3)) < v(dp, tc * (1 - 1e-3))
    assert v(d, tc * (1 + 1e-3)) > v(dp, tc * (1 + 1e-3))


def test_consecutive_closed_form():
    for d in range(2, 12):
        direct = (math.factorial(2 * d - 1) / math.factorial(d - 1) / 2) ** (1 / d)
        assert critical_time(d, d - 1, 1) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("args", [(2, 3, 1), (2, 2, 1), (3, 0, 1), (3, 2, 0), (3, 2, -1)])
def test_critical_time_rejects(args):
    with pytest.raises(ValidationError):
        critical_time(*args)


def test_bessel():
    ref = sum(1 / math.factorial(k) ** 2 for k in range(40))
    assert bessel_i0(2.0) == pytest.approx(ref, rel=1e-15)
    assert bessel_i0(0.0) == 1
    from scipy.special import i0

    for x in (0.3, 5.0, 20.0, 40.0):
        assert bessel_i0(x) == pytest.approx(i0(x), rel=1e-13)


def test_diameter_limit():
    lim = asymptotics("diameter_d_to_inf", mu=1, t=1)
    assert lim == pytest.approx(2 * math.sqrt(bessel_i0(2) - 1), rel=1e-15)
    from scipy.special import i0

    assert lim == pytest.approx(2 * math.sqrt(i0(2.0) - 1), rel=1e-14)
    assert round(lim, 4) == 2.2624
    prev = 0
    for d in range(1, 31):
        cur = diameter(single_chain(d, 1, 1)).value
        assert prev <= cur <= lim
        prev = cur


def test_tcr_asymptotic():
    for d in (10, 40):
        ratio = asymptotics("tcr_d_to_inf", d=d, mu=1) / critical_time(d, d - 1, 1)
        assert abs(ratio - 1) < 0.05


def test_volume_asymptotic_formula():
    # evaluates the stated closed form; no claim about its accuracy
    d, mu, t = 5, 1.5, 2.0
    c = 1.28242712910062
    ref = (2 * mu) ** d * t ** (d * (d + 1) / 2) * math.exp(1.5 * d * d + 1 / 12) / (
        c * 2 ** (2 * d * d - 1 / 12) * d ** (d * d + 1 / 12)
    )
    assert asymptotics("volume_d_to_inf", d=d, mu=mu, t=t) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(ValidationError):
        asymptotics("bogus")


def test_size_report():
    spec = ReachSpec.create((2, 1), mu=(5, 3), t=4)
    rep = size_report(spec)
    assert rep.volume == math.prod(rep.per_block_volumes) == 25600
    assert np.linalg.norm(rep.diameter_direction) == pytest.approx(1)
    assert set(rep.to_dict()) == {"volume", "diameter", "diameter_direction", "per_block_volumes"}


def test_size_curve():
    rows = size_curve("volume", [2, 3], [0.5, 1.0])
    assert [r[:2] for r in rows] == [(2, 0.5), (2, 1.0), (3, 0.5), (3, 1.0)]
    assert rows[1][2] == pytest.approx(2 / 3)
    with pytest.raises(ValidationError):
        size_curve("area", [2], [1.0])

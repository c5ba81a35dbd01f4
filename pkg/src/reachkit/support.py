"""Support functions of integrator reach sets.

For a box input the support function splits into per-block terms, and each
term is an integral of ``|P_j(s)|`` where ``P_j(s) = <y_j, xi_j(s)>`` is a
polynomial of degree ``r_j - 1``. That integral is evaluated exactly by
cutting ``[0, t]`` at the sign changes of ``P_j``.
"""

import math
from dataclasses import dataclass, field
from numbers import Real

import numpy as np
from scipy.integrate import quad

from .core import ReachSpec, free_response, inv_factorial, state_transition, zeta_block
from .errors import ValidationError
from .poly import UniPoly, real_roots_in_interval

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class SupportResult:
    value: float
    argmax_state: np.ndarray = None


@dataclass(frozen=True)
class WidthResult:
    value: float
    normalized: bool = False
    meta: dict = field(default_factory=dict)


# input-set variants -------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Marker for the box input set carried by the spec itself."""


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite set of admissible input values (rows, each of length ``m``)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValidationError("point cloud must be a nonempty 2-d array", field="points", code="empty")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("point cloud has non-finite entries", field="points", code="non_finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class PNormBall:
    """Unit ``p``-norm ball; ``p`` in ``(0, inf]``."""

    p: float

    def __post_init__(self):
        p = self.p
        if isinstance(p, bool) or not isinstance(p, Real) or math.isnan(p) or p <= 0:
            raise ValidationError(f"p must be in (0, inf], got {p!r}", field="p", code="range")

    @property
    def q(self):
        return dual_exponent(self.p)


def dual_exponent(p):
    """Hölder conjugate of ``max(1, p)``."""
    if math.isinf(p):
        return 1.0
    if p > 1:
        return p / (p - 1)
    return math.inf


# helpers -----------------------------------------------------------------


def as_direction(spec, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.d,):
        raise ValidationError(f"direction must have shape ({spec.d},), got {y.shape}", field="y", code="shape")
    if not np.all(np.isfinite(y)):
        raise ValidationError("direction has non-finite entries", field="y", code="non_finite")
    return y


def block_polynomial(yj):
    """``s -> <y_j, xi_j(s)>`` as a ``UniPoly``; ``y_j`` has length ``r_j``."""
    rj = len(yj)
    return UniPoly(float(yj[rj - 1 - i]) * inv_factorial(i) for i in range(rj))


def sign_pieces(poly, t):
    """Split ``[0, t]`` at the sign changes of ``poly``.

    Returns ``(a, b, sign)`` triples; tangential roots do not split.
    """
    if poly.is_zero():
        return [(0.0, t, 0)]
    if poly.degree == 0:
        return [(0.0, t, 1 if poly.coeffs[0] > 0 else -1)]
    cuts = [r.value for r in real_roots_in_interval(poly, 0.0, t) if not r.even and 0.0 < r.value < t]
    knots = [0.0] + cuts + [t]
    out = []
    for a, b in zip(knots, knots[1:]):
        if b <= a:
            continue
        v = poly(0.5 * (a + b))
        out.append((a, b, (v > 0) - (v < 0)))
    return out


def abs_integral(poly, t):
    """Exact ``int_0^t |poly(s)| ds`` together with the signed pieces."""
    pieces = sign_pieces(poly, t)
    if poly.is_zero():
        return 0.0, pieces
    Q = poly.antideriv()
    total = math.fsum(abs(Q(b) - Q(a)) for a, b, _ in pieces)
    return total, pieces


def _box_terms(spec, y, want_argmax):
    t = float(spec.t)
    x_free = free_response(spec)
    value = [float(y @ x_free)]
    xstar = x_free.copy() if want_argmax else None
    for sl, rj, mu, nu in zip(spec.blocks(), spec.r, spec.mu, spec.nu):
        yj = y[sl]
        zfull = zeta_block(rj, 0.0, t)
        value.append(float(nu) * float(yj @ zfull))
        if want_argmax:
            xstar[sl] += float(nu) * zfull
        if mu == 0 or not np.any(yj):
            continue
        P = block_polynomial(yj)
        integral, pieces = abs_integral(P, t)
        value.append(float(mu) * integral)
        if want_argmax:
            for a, b, sgn in pieces:
                if sgn:
                    xstar[sl] += float(mu) * sgn * zeta_block(rj, a, b)
    return math.fsum(value), xstar


def support_box(spec, y, argmax=True):
    """Support function of the reach set in direction ``y`` for a box input.

    ``argmax_state`` is the endpoint of the bang-bang control that attains
    the supremum.
    """
    y = as_direction(spec, y)
    value, xstar = _box_terms(spec, y, argmax)
    return SupportResult(value, xstar)


def support_box_batch(spec, Y, argmax=True):
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return [support_box(spec, y, argmax=argmax) for y in Y]


def support_values(spec, Y):
    """Support values for the rows of ``Y`` as a float array."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return np.array([support_box(spec, y, argmax=False).value for y in Y])


# general input sets ------------------------------------------------------


def _block_polys(spec, y):
    return [block_polynomial(y[sl]) for sl in spec.blocks()]


def _breakpoints(polys, t):
    pts = set()
    for P in polys:
        if P.degree >= 1:
            pts.update(r.value for r in real_roots_in_interval(P, 0.0, t) if 0.0 < r.value < t)
    return sorted(pts)


def _integrate(f, t, points):
    val, _ = quad(f, 0.0, t, points=points or None, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
    return val


def support_general(spec, variant, y):
    """Support function for a non-box input set, by adaptive quadrature.

    The spec's own box is ignored here; only ``x0`` and ``t`` are used.
    """
    y = as_direction(spec, y)
    t = float(spec.t)
    base = float(y @ free_response(spec))
    if isinstance(variant, Box):
        return support_box(spec, y)
    polys = _block_polys(spec, y)
    pts = _breakpoints(polys, t)
    if isinstance(variant, PointCloud):
        U = variant.points
        if U.shape[1] != spec.m:
            raise ValidationError(
                f"point cloud rows must have length {spec.m}", field="points", code="shape"
            )

        def f(s):
            v = np.array([P(s) for P in polys])
            return float(np.max(U @ v))

    elif isinstance(variant, PNormBall):
        q = variant.q

        def f(s):
            v = np.array([P(s) for P in polys])
            return float(np.linalg.norm(v, ord=q))

    else:
        raise ValidationError(f"unsupported input set {type(variant).__name__}", field="variant")
    return SupportResult(base + _integrate(f, t, pts), None)


def support_sum_with_initial_set(spec, X0_points, y):
    """Support of the reach set from a finite set of initial states."""
    y = as_direction(spec, y)
    X0 = np.atleast_2d(np.asarray(X0_points, dtype=float))
    if X0.size == 0:
        raise ValidationError("initial set is empty", field="X0_points", code="empty")
    if X0.shape[1] != spec.d:
        raise ValidationError(f"initial states must have length {spec.d}", field="X0_points", code="shape")
    Phi = state_transition(spec.system, spec.t)
    lead = float(np.max(X0 @ Phi.T @ y))
    zero = spec.with_x0((0,) * spec.d)
    return lead + support_box(zero, y, argmax=False).value


def width(spec, eta):
    """Width ``h(eta) + h(-eta)`` of the reach set along ``eta``.

    Only the input part survives: ``2 sum_j mu_j int_0^t |<eta_j, xi_j(s)>| ds``.
    A non-unit ``eta`` is normalized and flagged.
    """
    eta = as_direction(spec, eta)
    n = float(np.linalg.norm(eta))
    if n == 0:
        raise ValidationError("width direction is zero", field="eta", code="zero_direction")
    normalized = abs(n - 1.0) > 1e-12
    if normalized:
        eta = eta / n
    t = float(spec.t)
    parts = []
    for sl, mu in zip(spec.blocks(), spec.mu):
        if mu:
            parts.append(2.0 * float(mu) * abs_integral(block_polynomial(eta[sl]), t)[0])
    meta = {"input_norm": n} if normalized else {}
    return WidthResult(math.fsum(parts), normalized, meta)

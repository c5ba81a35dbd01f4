"""Boundary of integrator reach sets: parametric samples, implicit
polynomials, membership and the generic-line diagnostic.

Each single-input block is bounded by an "upper" and a "lower" surface.
Both are images of the ordered simplex ``0 <= s_1 <= ... <= s_{r-1} <= t``
and, after an affine change of coordinates ``x -> rho``, both become the
zero set of one polynomial ``wp(rho)`` that depends only on ``r``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy.optimize import minimize

from .core import factorial, free_response, to_fraction, xi_block, zeta_block
from .errors import CapabilityError, ValidationError
from .poly import (
    MultiPoly,
    UniPoly,
    cauchy_bound,
    hankel_indices,
    poly_gcd,
    poly_matrix_det,
    real_roots_in_interval,
    series_exp,
)
from .support import as_direction, support_box

MAX_IMPLICIT_DEGREE = 8
INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


@dataclass(frozen=True)
class BoundaryParams:
    """Block index, surface sign (+1 upper, -1 lower) and ordered parameters."""

    block: int
    sign: int
    s: tuple

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError(f"sign must be +1 or -1, got {self.sign!r}", field="sign")
        s = tuple(self.s)
        if any(b < a for a, b in zip(s, s[1:])):
            raise ValidationError(f"parameters must be nondecreasing, got {s}", field="s", code="unsorted")
        object.__setattr__(self, "s", s)


@dataclass(frozen=True, eq=False)
class ImplicitSurface:
    r: int
    poly: MultiPoly
    degree: int


def _check_block(spec, j):
    if not (isinstance(j, (int, np.integer)) and 0 <= j < spec.m):
        raise ValidationError(f"block index {j!r} out of range for m = {spec.m}", field="block", code="range")
    return int(j)


def _block_free(spec, j):
    return free_response(spec)[spec.blocks()[j]]


def boundary_point(spec, params):
    """Point of the upper (``sign=+1``) or lower surface of block ``j``."""
    j = _check_block(spec, params.block)
    rj, t = spec.r[j], float(spec.t)
    s = params.s
    if len(s) != rj - 1:
        raise ValidationError(f"block {j} needs {rj - 1} parameters, got {len(s)}", field="s", code="shape")
    if s and (s[0] < 0 or s[-1] > t):
        raise ValidationError(f"parameters must lie in [0, {t}]", field="s", code="range")
    mu, nu = float(spec.mu[j]), float(spec.nu[j])
    out = _block_free(spec, j) + nu * zeta_block(rj, 0.0, t)
    for k in range(rj):
        e = rj - k
        acc = (-1) ** (rj - 1) * t ** e + 2 * math.fsum((-1) ** q * sq ** e for q, sq in enumerate(s))
        out[k] += params.sign * mu * acc / factorial(e)
    return out


def sample_boundary(spec, block, grid):
    """Boundary samples of block ``block`` on the ordered-simplex lattice.

    Parameters take values ``t k / (grid - 1)``; returns ``(points, signs)``
    with ``2 * C(grid + r - 2, r - 1)`` rows.
    """
    j = _check_block(spec, block)
    if not isinstance(grid, (int, np.integer)) or grid < 2:
        raise ValidationError(f"grid must be an integer >= 2, got {grid!r}", field="grid", code="range")
    rj, t = spec.r[j], float(spec.t)
    levels = [t * k / (grid - 1) for k in range(grid)]
    pts, signs = [], []
    for sign in (1, -1):
        for combo in combinations_with_replacement(range(grid), rj - 1):
            s = tuple(levels[k] for k in combo)
            pts.append(boundary_point(spec, BoundaryParams(j, sign, s)))
            signs.append(sign)
    return np.array(pts).reshape(len(pts), rj), np.array(signs)


def rho_names(r):
    return tuple(f"rho{k}" for k in range(1, r + 1))


def x_names(r):
    return tuple(f"x{k}" for k in range(1, r + 1))


@lru_cache(maxsize=None)
def _implicit(r):
    lam_vars = tuple(f"lam{k}" for k in range(1, r + 1))
    lams = MultiPoly.generators(lam_vars)
    A = series_exp(lams, r)
    H = [[A[i] for i in row] for row in hankel_indices(r)]
    det = poly_matrix_det(H)
    # lam_k = rho_{r-k+1}: reverse the exponent tuples
    wp = MultiPoly(rho_names(r), {e[::-1]: c for e, c in det.terms.items()})
    return wp.monic(priority=rho_names(r)[::-1])


def implicitize(r):
    """Canonical implicit polynomial of the ``r``-dimensional boundary.

    Built from the vanishing Hankel determinant of the power-series
    coefficients of ``exp(-sum lam_k tau^k / k)`` with ``lam_k = rho_{r-k+1}``,
    and normalized to be monic in its lexicographically largest monomial
    (``rho_r`` most significant).
    """
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)):
        raise ValidationError(f"r must be an integer, got {r!r}", field="r")
    if not 2 <= r <= MAX_IMPLICIT_DEGREE:
        raise CapabilityError(f"implicitization supports 2 <= r <= {MAX_IMPLICIT_DEGREE}, got {r}", field="r")
    return _implicit(int(r)).copy()


def implicit_degree(r):
    delta = (r - 1) // 2
    return (delta + 1) * (r - delta)


def implicit_surface(r):
    return ImplicitSurface(int(r), implicitize(r), implicit_degree(r))


def parametric_rho(s, r):
    """``rho_k = sum_q (-1)^{q+1} s_q^{r-k+1}``, generic in the number type."""
    return [sum((-1) ** q * sq ** (r - k) for q, sq in enumerate(s)) for k in range(r)]


def rho_map(spec, block, sign):
    """Affine maps ``x_k -> rho_k`` for block ``block`` as exact pairs ``(a_k, b_k)``.

    ``rho_k = a_k x_k + b_k``; on the surface with the given sign the image
    satisfies ``rho^+ = sum_q (-1)^{q+1} s_q^e`` and ``rho^- = -sum_q ...``.
    """
    j = _check_block(spec, block)
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign!r}", field="sign")
    mu = spec.input.mu_exact()[j]
    if mu == 0:
        raise ValidationError(
            f"block {j} has a degenerate input interval (mu = 0)", field="alpha", code="degenerate_input"
        )
    nu = spec.input.nu_exact()[j]
    rj = spec.r[j]
    t = to_fraction(spec.t)
    x0 = [to_fraction(v) for v in spec.x0[spec.blocks()[j]]]
    maps = []
    for k in range(rj):
        e = rj - k
        free = sum(t ** (l - k) / factorial(l - k) * x0[l] for l in range(k, rj))
        a = Fraction(factorial(e)) / (2 * mu)
        b = -a * free - Fraction(1, 2) * (sign * (-1) ** (rj - 1) * t ** e + nu / mu * t ** e)
        maps.append((a, b))
    return maps


@lru_cache(maxsize=256)
def _bounding(r, t, x0, mu, nu):
    from .core import ReachSpec

    spec = ReachSpec.create((r,), alpha=(nu - mu,), beta=(nu + mu,), x0=x0, t=t)
    wp = implicitize(r) if r >= 2 else None
    xs = MultiPoly.generators(x_names(r))
    out = []
    for sign in (1, -1):
        maps = rho_map(spec, 0, sign)
        # on the lower surface rho^- = -(parametric form), hence the flip
        subs = [xs[k] * a + b for k, (a, b) in enumerate(maps)]
        if sign < 0:
            subs = [-p for p in subs]
        out.append(wp.compose(subs))
    return tuple(out)


def bounding_polynomials(spec, block):
    """``(p_upper, p_lower)`` in the block coordinates ``x1..x_r``.

    The block reach set is ``{p_upper <= 0, p_lower <= 0}`` for ``r <= 3``.
    """
    j = _check_block(spec, block)
    rj = spec.r[j]
    if rj < 2:
        raise CapabilityError("bounding polynomials need r_j >= 2", field="r")
    mu, nu = spec.input.mu_exact()[j], spec.input.nu_exact()[j]
    x0 = tuple(to_fraction(v) for v in spec.x0[spec.blocks()[j]])
    # hashable exact key; alpha/beta rebuilt from mu, nu
    pu, pl = _bounding(rj, to_fraction(spec.t), x0, mu, nu)
    return pu.copy(), pl.copy()


# membership -------------------------------------------------------------


def _classify(margin, tol):
    """``margin`` is a signed distance-like quantity, positive outside."""
    if margin > tol:
        return OUTSIDE
    if margin < -tol:
        return INSIDE
    return BOUNDARY


def _block_center(spec, j):
    return _block_free(spec, j) + float(spec.nu[j]) * zeta_block(spec.r[j], 0.0, float(spec.t))


def _contains_interval(spec, j, xj, tol):
    c = _block_center(spec, j)[0]
    half = float(spec.mu[j]) * float(spec.t)
    return _classify(abs(xj[0] - c) - half, tol)


def _slab_margin(spec, j, last):
    # the last coordinate ranges over exactly [c - mu t, c + mu t]; this
    # cuts away the extra sheet of {p_upper <= 0, p_lower <= 0} for r = 3
    c = _block_center(spec, j)[-1]
    return abs(last - c) - float(spec.mu[j]) * float(spec.t)


def _contains_implicit(spec, j, xj, tol):
    pu, pl = bounding_polynomials(spec, j)
    slab = _slab_margin(spec, j, xj[-1])
    if slab > tol:
        return OUTSIDE
    return _classify(max(float(pu(list(xj))), float(pl(list(xj)))), tol)


def _quad_nodes(t, panels=64, order=4):
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, t, panels + 1)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + h[:, None] * g[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _xi_matrix(rj, nodes):
    return np.stack([xi_block(rj, s) for s in nodes])


def signed_distance(spec, block, xj, starts=512, iters=40, seed=0):
    """``max_{|y|=1} <y, x> - h(y)`` for one block: the signed distance to
    its boundary (positive outside).

    A vectorized multi-start ascent on the sphere with quadrature-based
    support values picks candidates; the best are refined with exact
    support values. Returns ``(distance, direction)``.
    """
    j = _check_block(spec, block)
    rj, t = spec.r[j], float(spec.t)
    mu = float(spec.mu[j])
    xj = np.asarray(xj, dtype=float)
    c = _block_center(spec, j)
    z = xj - c
    bspec = spec.block_spec(j)

    nodes, weights = _quad_nodes(t)
    Xi = _xi_matrix(rj, nodes)  # (n, r)

    def approx(Y):
        P = Y @ Xi.T  # (k, n)
        h = mu * (np.abs(P) @ weights)
        grad = mu * (np.sign(P) * weights) @ Xi  # d h / d y
        return Y @ z - h, z - grad

    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(starts, rj))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    for it in range(iters):
        _, G = approx(Y)
        G -= np.sum(G * Y, axis=1, keepdims=True) * Y
        Y = Y + G / math.sqrt(it + 1.0) / max(1.0, mu * t)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    vals, _ = approx(Y)
    order = np.argsort(vals)[::-1][:4]

    def exact(y):
        n = np.linalg.norm(y)
        u = y / n
        res = support_box(bspec, u)
        g = float(u @ xj) - res.value
        grad_u = xj - res.argmax_state
        grad = (grad_u - (grad_u @ u) * u) / n
        return -g, -grad

    best, best_dir = -math.inf, None
    for k in order:
        sol = minimize(exact, Y[k], jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 200})
        u = sol.x / np.linalg.norm(sol.x)
        val = float(u @ xj) - support_box(bspec, u, argmax=False).value
        if val > best:
            best, best_dir = val, u
    return best, best_dir


def contains(spec, x, tol=1e-9):
    """Classify ``x`` as ``"inside"``, ``"boundary"`` or ``"outside"``.

    Blocks are tested separately (the reach set is their product). Blocks
    with ``r_j <= 3`` use the implicit bounding polynomials, longer chains a
    signed-distance search.
    """
    x = as_direction(spec, x)
    states = []
    for j, (sl, rj) in enumerate(zip(spec.blocks(), spec.r)):
        xj = x[sl]
        if spec.mu[j] == 0:
            dev = float(np.max(np.abs(xj - _block_center(spec, j))))
            states.append(BOUNDARY if dev <= tol else OUTSIDE)
        elif rj == 1:
            states.append(_contains_interval(spec, j, xj, tol))
        elif rj <= 3:
            states.append(_contains_implicit(spec, j, xj, tol))
        else:
            states.append(_classify(signed_distance(spec, j, xj)[0], tol))
    if OUTSIDE in states:
        return OUTSIDE
    if BOUNDARY in states:
        return BOUNDARY
    return INSIDE


def implicit_mask(spec, X):
    """Vectorized membership for specs whose blocks all have ``r_j <= 3``.

    Returns a boolean array; points on the boundary count as inside.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mask = np.ones(X.shape[0], dtype=bool)
    for j, (sl, rj) in enumerate(zip(spec.blocks(), spec.r)):
        Xj = X[:, sl]
        if rj > 3:
            raise CapabilityError("vectorized membership needs r_j <= 3", field="r")
        if rj == 1:
            c = _block_center(spec, j)[0]
            mask &= np.abs(Xj[:, 0] - c) <= float(spec.mu[j]) * float(spec.t)
            continue
        pu, pl = bounding_polynomials(spec, j)
        mask &= _slab_margin(spec, j, Xj[:, -1]) <= 0
        mask &= (pu.evaluate_array(Xj) <= 0) & (pl.evaluate_array(Xj) <= 0)
    return mask


# generic-line diagnostic -------------------------------------------------


def _line_poly(p, point, direction):
    lam = MultiPoly.generators(("lam",))[0]
    subs = [lam * to_fraction(v) + to_fraction(c) for c, v in zip(point, direction)]
    return p.compose(subs).to_unipoly()


def _line_roots(polys, full_degree):
    roots = []
    for P in polys:
        if P.degree < full_degree:
            return None  # a root escaped to infinity
        if poly_gcd(P, P.deriv()).degree > 0:
            return None  # tangency
        B = cauchy_bound(P)
        roots.extend(r.value for r in real_roots_in_interval(P, -B, B, tol=Fraction(1, 10 ** 13)))
    roots.sort()
    if any(b - a <= 1e-10 for a, b in zip(roots, roots[1:])):
        return None
    return roots


def line_intersection_count(spec, point, trials=1, seed=0, max_resample=100, block=0):
    """Real intersections of random lines through ``point`` with the
    algebraic boundary ``{p_upper = 0} U {p_lower = 0}`` of a block with
    ``r_j`` in ``{2, 3}``.

    Returns ``(counts, resampled)``: one count per trial and the number of
    non-generic lines that were discarded.
    """
    j = _check_block(spec, block)
    rj = spec.r[j]
    if rj not in (2, 3):
        raise CapabilityError("line diagnostic supports r_j in {2, 3}", field="r")
    point = np.asarray(point, dtype=float)
    if point.shape != (rj,):
        raise ValidationError(f"point must have length {rj}", field="point", code="shape")
    full = np.zeros(spec.d)
    full[spec.blocks()[j]] = point
    for k, sl in enumerate(spec.blocks()):
        if k != j:
            full[sl] = _block_center(spec, k)
    if contains(spec, full) != INSIDE:
        raise ValidationError("line base point is not interior", field="point", code="not_interior")
    pu, pl = bounding_polynomials(spec, j)
    deg = implicit_degree(rj)
    rng = np.random.default_rng(seed)
    counts, resampled = [], 0
    for _ in range(trials):
        for _attempt in range(max_resample + 1):
            v = rng.normal(size=rj)
            v /= np.linalg.norm(v)
            roots = _line_roots([_line_poly(pu, point, v), _line_poly(pl, point, v)], deg)
            if roots is not None:
                counts.append(len(roots))
                break
            resampled += 1
        else:
            raise ValidationError("no generic line found", field="direction", code="non_generic")
    return counts, resampled


# rendering ----------------------------------------------------------------


def render_svg(spec, samples=512, size=480, margin=24):
    """SVG line art of a double-integrator block: both bounding arcs and
    the diameter chord."""
    if tuple(spec.r) != (2,):
        raise CapabilityError("render2d supports r = (2,) only", field="r")
    t = float(spec.t)
    s = np.linspace(0.0, t, samples)
    upper = np.array([boundary_point(spec, BoundaryParams(0, 1, (v,))) for v in s])
    lower = np.array([boundary_point(spec, BoundaryParams(0, -1, (v,))) for v in s])
    eta = zeta_block(2, 0.0, t)
    eta = eta / np.linalg.norm(eta)
    chord = np.array([support_box(spec, eta).argmax_state, support_box(spec, -eta).argmax_state])
    allp = np.vstack([upper, lower])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    scale = (size - 2 * margin) / span

    def path(pts):
        px = margin + (pts[:, 0] - lo[0]) * scale[0]
        py = size - margin - (pts[:, 1] - lo[1]) * scale[1]
        return "M " + " L ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))

    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">\n'
        f'  <path d="{path(upper)}" fill="none" stroke="#1f77b4" stroke-width="2"/>\n'
        f'  <path d="{path(lower)}" fill="none" stroke="#d62728" stroke-width="2"/>\n'
        f'  <path d="{path(chord)}" fill="none" stroke="#555555" stroke-width="1" stroke-dasharray="4 3"/>\n'
        "</svg>\n"
    )

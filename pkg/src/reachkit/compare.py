"""Zonotope approximants, volume oracles, Hausdorff distances and the
benchmark harness."""

import math
from collections import namedtuple
from itertools import combinations
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

from .boundary import implicit_mask
from .core import free_response, xi_block, zeta_block
from .errors import CapabilityError, ValidationError
from .poly import real_roots_in_interval
from .size import diameter, volume
from .support import abs_integral, block_polynomial, dual_exponent, support_box

EXACT_TERM_LIMIT = 10 ** 6
SIGN_PATTERN_LIMIT = 20

VolumeEstimate = namedtuple("VolumeEstimate", ["value", "std_error", "method"])


@dataclass(frozen=True, eq=False)
class Zonotope:
    """``center + sum_i [-1, 1] g_i``; generators are the rows of ``generators``."""

    center: np.ndarray
    generators: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        G = np.asarray(self.generators, dtype=float)
        if G.size == 0:
            G = G.reshape(0, c.size)
        if G.ndim != 2 or G.shape[1] != c.size:
            raise ValidationError("generators must be rows of the center's dimension", field="generators", code="shape")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", G)

    @property
    def d(self):
        return self.center.size

    def support(self, y):
        y = np.asarray(y, dtype=float)
        return float(y @ self.center + np.sum(np.abs(self.generators @ y)))

    def volume(self):
        return zonotope_volume(self)

    def diameter(self):
        return zonotope_diameter(self)[0]


def _block_embed(spec, j, vecs):
    out = np.zeros((vecs.shape[0], spec.d))
    out[:, spec.blocks()[j]] = vecs
    return out


def _center(spec):
    t = float(spec.t)
    c = free_response(spec)
    for sl, rj, nu in zip(spec.blocks(), spec.r, spec.nu):
        c[sl] += float(nu) * zeta_block(rj, 0.0, t)
    return c


def zonotope_approximant(spec, n, mode="inner-sample"):
    """Zonotope from discretizing ``[0, t]`` into ``n`` steps.

    ``inner-sample``: generators ``(t/n) mu_j xi_j(t_i)``, ``t_i = i t/n``,
    ``i = 0..n``. ``outer-pad``: generators ``|C_i| mu_j xi_j(t_i)`` over
    the cells ``C_i = [t_i - t/2n, t_i + t/2n] & [0, t]`` plus one
    axis-aligned generator per coordinate bounding the variation of
    ``xi_j`` inside each cell, so the reach set is contained.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}", field="n", code="range")
    if mode not in ("inner-sample", "outer-pad"):
        raise ValidationError(f"unknown mode {mode!r}", field="mode")
    t = float(spec.t)
    ts = np.linspace(0.0, t, n + 1)
    h = t / n
    gens = []
    pad = np.zeros(spec.d)
    for j, (sl, rj, mu) in enumerate(zip(spec.blocks(), spec.r, spec.mu)):
        mu = float(mu)
        Xi = np.stack([xi_block(rj, s) for s in ts])
        if mode == "inner-sample":
            gens.append(_block_embed(spec, j, h * mu * Xi))
            continue
        lo = np.clip(ts - h / 2, 0.0, t)
        hi = np.clip(ts + h / 2, 0.0, t)
        widths = hi - lo
        gens.append(_block_embed(spec, j, (widths * mu)[:, None] * Xi))
        # xi_j is componentwise nondecreasing on [0, t]
        Xlo = np.stack([xi_block(rj, s) for s in lo])
        Xhi = np.stack([xi_block(rj, s) for s in hi])
        dev = np.maximum(Xhi - Xi, Xi - Xlo)
        pad[sl] = mu * np.sum(widths[:, None] * dev, axis=0)
    G = np.vstack(gens)
    if mode == "outer-pad":
        G = np.vstack([G, np.diag(pad)[pad > 0]])
    G = G[np.any(G != 0, axis=1)]
    return Zonotope(_center(spec), G, degenerate=n < spec.d)


def _sum_abs_cross(P):
    """``sum_{j<k} |a_j x a_k|`` over 2-d rows, batched on the leading axes.

    Rows are folded into the upper half-plane and sorted by angle; then every
    ordered pair has a nonnegative cross product and the sum is a prefix-sum
    identity, ``O(n log n)``.
    """
    ang = np.arctan2(P[..., 1], P[..., 0])
    flip = (ang < 0) | (ang >= np.pi)
    P = np.where(flip[..., None], -P, P)
    ang = np.where(flip, ang + np.pi, ang) % np.pi
    order = np.argsort(ang, axis=-1, kind="stable")
    P = np.take_along_axis(P, order[..., None], axis=-2)
    X = np.cumsum(P[..., 0], axis=-1) - P[..., 0]
    Y = np.cumsum(P[..., 1], axis=-1) - P[..., 1]
    return np.sum(P[..., 1] * X - P[..., 0] * Y, axis=-1)


def merge_parallel(G, rtol=1e-12):
    """Merge parallel generators; the zonotope is unchanged."""
    G = G[np.any(G != 0, axis=1)]
    if G.shape[0] == 0:
        return G
    norms = np.linalg.norm(G, axis=1)
    U = G / norms[:, None]
    # canonical orientation: first significant entry positive
    first = np.argmax(np.abs(U) > 1e-8, axis=1)
    sgn = np.sign(U[np.arange(len(U)), first])
    U *= sgn[:, None]
    keys = np.round(U / rtol ** 0.5).astype(np.int64)
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    out = np.zeros((inv.max() + 1, G.shape[1]))
    np.add.at(out, inv, (G * sgn[:, None]))
    return out


def _volume_exact_enum(G):
    n, d = G.shape
    idx = np.array(list(combinations(range(n), d)), dtype=np.intp)
    dets = np.abs(np.linalg.det(G[idx]))
    return 2 ** d * math.fsum(dets)


def _volume_exact_3d(G, batch=64):
    # |det(g_i, g_j, g_k)| = |g_i| * |cross of the projections onto g_i^perp|;
    # every triple is counted once per member, hence the 1/3
    norms = np.linalg.norm(G, axis=1)
    U = G / norms[:, None]
    A = np.eye(3)[np.argmin(np.abs(U), axis=1)]
    E1 = np.cross(U, A)
    E1 /= np.linalg.norm(E1, axis=1, keepdims=True)
    E2 = np.cross(U, E1)
    total = []
    for start in range(0, G.shape[0], batch):
        sl = slice(start, start + batch)
        P = np.stack([E1[sl] @ G.T, E2[sl] @ G.T], axis=-1)  # (b, n, 2)
        total.extend(norms[sl] * _sum_abs_cross(P))
    return 8.0 * math.fsum(total) / 3.0


def zonotope_volume_detail(Z, samples=200_000, seed=0):
    """Volume of ``Z`` with the method used and a standard error.

    Exact whenever possible: full enumeration up to ``10^6`` subsets, an
    angular sweep for ``d = 2`` and a projection sweep for ``d = 3``;
    otherwise an unbiased estimate from uniformly sampled ``d``-subsets.
    """
    G = merge_parallel(Z.generators)
    n, d = G.shape[0], Z.d
    if n < d:
        return VolumeEstimate(0.0, 0.0, "empty")
    if math.comb(n, d) <= EXACT_TERM_LIMIT:
        return VolumeEstimate(_volume_exact_enum(G), 0.0, "enumeration")
    if d == 1:
        return VolumeEstimate(2.0 * math.fsum(np.abs(G[:, 0])), 0.0, "enumeration")
    if d == 2:
        return VolumeEstimate(4.0 * float(_sum_abs_cross(G)), 0.0, "sweep")
    if d == 3:
        return VolumeEstimate(_volume_exact_3d(G), 0.0, "sweep")
    rng = np.random.default_rng(seed)
    dets = np.empty(samples)
    chunk = 50_000
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        idx = np.argsort(rng.random((k, n)), axis=1)[:, :d]
        dets[start:start + k] = np.abs(np.linalg.det(G[idx]))
    scale = 2 ** d * math.comb(n, d)
    return VolumeEstimate(scale * float(np.mean(dets)), scale * float(np.std(dets, ddof=1)) / math.sqrt(samples), "sampled")


def zonotope_volume(Z):
    return zonotope_volume_detail(Z).value


def _common_orthant(G):
    if G.shape[0] == 0:
        return True
    ref = G[np.argmax(np.linalg.norm(G, axis=1))]
    sigma = np.where(ref >= 0, 1.0, -1.0)
    F = G * np.where(G @ sigma >= 0, 1.0, -1.0)[:, None]
    return bool(np.all(F * sigma >= -1e-15 * np.abs(F).max()))


def zonotope_diameter(Z):
    """``2 max |sum_i e_i g_i|`` over sign patterns; returns ``(value, method)``."""
    G = Z.generators
    n = G.shape[0]
    if n == 0:
        return 0.0, "empty"
    if n <= SIGN_PATTERN_LIMIT:
        best = 0.0
        chunk = 1 << 16
        for start in range(0, 1 << n, chunk):
            codes = np.arange(start, min(start + chunk, 1 << n))
            E = ((codes[:, None] >> np.arange(n)) & 1) * 2.0 - 1.0
            best = max(best, float(np.max(np.linalg.norm(E @ G, axis=1))))
        return 2 * best, "enumeration"
    if _common_orthant(G):
        return 2 * float(np.linalg.norm(np.sum(np.abs(G), axis=0))), "orthant"
    # local search over sign patterns
    rng = np.random.default_rng(0)
    best = 0.0
    for _ in range(32):
        e = rng.choice([-1.0, 1.0], size=n)
        for _ in range(100):
            v = e @ G
            e_new = np.where(G @ v >= 0, 1.0, -1.0)
            if np.array_equal(e_new, e):
                break
            e = e_new
        best = max(best, float(np.linalg.norm(e @ G)))
    return 2 * best, "local"


# Monte-Carlo oracle -------------------------------------------------------


def bounding_box(spec):
    eye = np.eye(spec.d)
    lo = np.array([-support_box(spec, -e, argmax=False).value for e in eye])
    hi = np.array([support_box(spec, e, argmax=False).value for e in eye])
    return lo, hi


def monte_carlo_volume(spec, samples=10 ** 6, seed=0, chunk=200_000):
    """Rejection-sampling volume estimate ``(estimate, std_error)``.

    Points are drawn uniformly from the tight bounding box with numpy's
    PCG64 generator, so a fixed seed reproduces the estimate bit for bit.
    """
    if spec.d > 6:
        raise CapabilityError("Monte-Carlo volume supports d <= 6", field="r")
    if any(rj > 3 for rj in spec.r):
        raise CapabilityError("Monte-Carlo volume needs r_j <= 3 for vectorized membership", field="r")
    if samples < 1:
        raise ValidationError("samples must be positive", field="samples", code="range")
    lo, hi = bounding_box(spec)
    rng = np.random.default_rng(seed)
    hits = 0
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        X = lo + (hi - lo) * rng.random((k, spec.d))
        hits += int(np.count_nonzero(implicit_mask(spec, X)))
    box = float(np.prod(hi - lo))
    f = hits / samples
    return box * f, box * math.sqrt(f * (1 - f) / samples)


# Hausdorff distance --------------------------------------------------------


@dataclass(frozen=True)
class HausdorffResult:
    distance: float
    direction: np.ndarray
    meta: dict = field(default_factory=dict)


def _check_unit_box(spec):
    if any(a != -1 for a in spec.input.alpha) or any(b != 1 for b in spec.input.beta):
        raise ValidationError("Hausdorff comparison needs alpha = -1 and beta = 1", field="alpha", code="range")


def _hausdorff_accurate(spec, y, q):
    t = float(spec.t)
    polys = [block_polynomial(y[sl]) for sl in spec.blocks()]
    l1 = math.fsum(abs_integral(P, t)[0] for P in polys)
    if math.isinf(q):
        pts = set()
        for P in polys:
            if P.degree >= 1:
                pts.update(r.value for r in real_roots_in_interval(P, 0.0, t) if 0 < r.value < t)
        # kinks also where two blocks swap the lead
        for a in range(len(polys)):
            for b in range(a + 1, len(polys)):
                for D in (polys[a] - polys[b], polys[a] + polys[b]):
                    if D.degree >= 1:
                        pts.update(r.value for r in real_roots_in_interval(D, 0.0, t) if 0 < r.value < t)
        points = sorted(pts)
    else:
        points = None

    def f(s):
        return float(np.linalg.norm([P(s) for P in polys], ord=q))

    lq, _ = quad(f, 0.0, t, points=points or None, epsabs=1e-12, epsrel=1e-12, limit=500)
    return l1 - lq


def _hausdorff_surrogate(spec, q, panels, order):
    """Composite Gauss-Legendre value and subgradient of ``J`` for rows of ``Y``."""
    t = float(spec.t)
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, t, panels + 1)
    half = np.diff(edges) / 2
    s = ((edges[:-1] + edges[1:]) / 2)[:, None] + half[:, None] * g
    s, wts = s.ravel(), (half[:, None] * w).ravel()
    blocks = spec.blocks()
    Xis = [np.stack([xi_block(rj, v) for v in s]) for rj in spec.r]  # (N, r_j)

    def evaluate(Y):
        V = np.stack([Y[:, sl] @ Xi.T for sl, Xi in zip(blocks, Xis)], axis=1)  # (k, m, N)
        A = np.abs(V)
        S = np.sign(V)
        if math.isinf(q):
            nq = A.max(axis=1)
            lead = A.argmax(axis=1)[:, None, :]
            dq = np.zeros_like(V)
            np.put_along_axis(dq, lead, np.take_along_axis(S, lead, axis=1), axis=1)
        else:
            nq = np.sum(A ** q, axis=1) ** (1.0 / q)
            safe = np.where(nq > 0, nq, 1.0)
            dq = S * (A / safe[:, None, :]) ** (q - 1)
        J = (A.sum(axis=1) - nq) @ wts
        D = (S - dq) * wts
        G = np.concatenate([D[:, j, :] @ Xi for j, Xi in enumerate(Xis)], axis=1)
        return J, G

    return evaluate


def hausdorff_p(spec, p, starts=2048, iters=500, seed=0, nodes=(16, 4)):
    """Hausdorff distance between the box-input reach set and the reach set
    for the unit ``p``-norm-ball input.

    Maximizes ``J(y) = int_0^t (|M y|_1 - |M y|_q) ds`` over unit ``y`` by
    multi-start projected subgradient ascent on a coarse quadrature
    surrogate, polishes the best candidates with BFGS on a fine one and
    scores them with exact l1 integrals plus adaptive quadrature.
    """
    if isinstance(p, bool) or not isinstance(p, (int, float)) or math.isnan(p) or p <= 0:
        raise ValidationError(f"p must be in (0, inf], got {p!r}", field="p", code="range")
    _check_unit_box(spec)
    q = dual_exponent(p)
    meta = {"q": q, "starts": starts, "iters": iters, "seed": seed}
    if spec.m == 1 or q == 1.0:
        # the integrand vanishes identically
        y = np.zeros(spec.d)
        y[0] = 1.0
        return HausdorffResult(0.0, y, meta)
    t = float(spec.t)
    coarse = _hausdorff_surrogate(spec, q, *nodes)
    fine = _hausdorff_surrogate(spec, q, 256, 8)

    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(starts, spec.d))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    scale = 1.0 / max(1.0, float(np.max(np.abs(coarse(Y)[1]))))
    for it in range(1, iters + 1):
        _, G = coarse(Y)
        Y = Y + scale * G / math.sqrt(it)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    J, _ = coarse(Y)

    def neg_fine(z):
        n = np.linalg.norm(z)
        u = z / n
        val, grad = fine(u[None, :])
        gu = grad[0]
        return -float(val[0]), -(gu - (gu @ u) * u) / n

    best, best_y = -math.inf, None
    for k in np.argsort(J)[::-1][:8]:
        sol = minimize(neg_fine, Y[k], jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": 200})
        for cand in (Y[k], sol.x / np.linalg.norm(sol.x)):
            val = _hausdorff_accurate(spec, cand, q)
            if val > best:
                best, best_y = val, cand
    return HausdorffResult(max(best, 0.0), best_y, meta)


# benchmark -----------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkRow:
    t: float
    n_or_order: int
    vol_exact: float
    vol_approx: float
    ratio: float
    diam_exact: float
    diam_approx: float

    FIELDS = ("t", "n_or_order", "vol_exact", "vol_approx", "ratio", "diam_exact", "diam_approx")

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.FIELDS)


def benchmark(spec, t_grid, n_grid, mode="outer-pad"):
    """Exact versus zonotope volume and diameter over ``t_grid x n_grid``."""
    t_grid, n_grid = list(t_grid), list(n_grid)
    if not t_grid or not n_grid:
        raise ValidationError("benchmark grids must be nonempty", field="t_grid", code="empty")
    rows = []
    for t in t_grid:
        s = spec.with_t(t)
        v_exact = volume(s)
        d_exact = diameter(s).value
        for n in n_grid:
            Z = zonotope_approximant(s, int(n), mode)
            v_approx = zonotope_volume(Z)
            ratio = v_exact / v_approx if v_approx > 0 else math.inf
            rows.append(BenchmarkRow(float(t), int(n), v_exact, v_approx, ratio, d_exact, Z.diameter()))
    return rows


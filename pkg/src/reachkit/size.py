"""Volume, diameter and their dependence on time and dimension."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ReachSpec, factorial, to_fraction, zeta
from .errors import CapabilityError, ValidationError
from .support import width

# Glaisher-Kinkelin constant
GLAISHER = 1.28242712910062


def vandermonde_constant(r):
    """``prod_{k=1}^{r-1} (k!)^2 / (2k+1)!`` as an exact ``Fraction``."""
    out = Fraction(1)
    for k in range(1, r):
        out *= Fraction(factorial(k) ** 2, factorial(2 * k + 1))
    return out


def _shape_factor(r):
    # prod_{k=1}^{r-1} k!/(2k+1)!
    out = Fraction(1)
    for k in range(1, r):
        out *= Fraction(factorial(k), factorial(2 * k + 1))
    return out


def _block_volume(rj, mu, t):
    return 2 ** rj * mu ** rj * t ** (rj * (rj + 1) // 2) * _shape_factor(rj)


def block_volumes(spec, exact=False):
    """Volume of each single-input factor of the reach set."""
    t = to_fraction(spec.t)
    parts = [_block_volume(rj, mu, t) for rj, mu in zip(spec.r, spec.input.mu_exact())]
    return parts if exact else [float(v) for v in parts]


def volume(spec, exact=False):
    """Lebesgue volume of the reach set; a ``Fraction`` when ``exact``.

    The reach set is a product over blocks, so the volume is the product
    of the block volumes. It does not depend on ``x0`` or on ``nu``.
    """
    out = Fraction(1)
    for v in block_volumes(spec, exact=True):
        out *= v
    return out if exact else float(out)


def volume_lower_bound(spec, vol_X0):
    """Brunn-Minkowski bound on the volume when the initial set has volume ``vol_X0``."""
    if not (isinstance(vol_X0, (int, float)) and math.isfinite(vol_X0)) or vol_X0 < 0:
        raise ValidationError(f"vol_X0 must be a finite nonnegative number, got {vol_X0!r}", field="vol_X0", code="range")
    d = spec.d
    core = volume(spec.with_x0((0,) * d)) / 2 ** d
    return (vol_X0 ** (1.0 / d) + 2 * core ** (1.0 / d)) ** d


@dataclass(frozen=True)
class DiameterResult:
    value: float
    direction: np.ndarray
    degenerate: bool = False


def _scaled_zeta(spec):
    return zeta(spec, 0.0, spec.t, scaled=True)


def diameter(spec):
    """Diameter ``2 |zeta(t)|`` and a maximizing direction ``zeta / |zeta|``."""
    z = _scaled_zeta(spec)
    n = float(np.linalg.norm(z))
    if n == 0:
        return DiameterResult(0.0, np.full(spec.d, np.nan), True)
    return DiameterResult(2.0 * n, z / n, False)


def unit_from_angles(phi, theta):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def angles_from_unit(eta):
    eta = np.asarray(eta, dtype=float)
    phi = math.atan2(eta[1], eta[0]) % (2 * math.pi)
    theta = math.acos(max(-1.0, min(1.0, eta[2])))
    return phi, theta


def diameter_maximizers(spec):
    """The two ``(phi, theta)`` tuples where the width of a triple
    integrator reach set peaks, with ``eta = (sin theta cos phi,
    sin theta sin phi, cos theta)``."""
    if tuple(spec.r) != (3,):
        raise CapabilityError("diameter maximizers are tabulated for r = (3,) only", field="r")
    t = float(spec.t)
    root = math.sqrt(t ** 4 + 9 * t ** 2 + 36)
    return (
        (math.atan(3 / t), math.acos(6 / root)),
        (math.pi + math.atan(3 / t), math.acos(-6 / root)),
    )


def width_map(spec, n_phi=64, n_theta=128):
    """Width over the grid ``phi in [0, pi]``, ``theta in [0, 2 pi)``.

    Returns ``(phi, theta, W)`` with ``W[i, k]`` the width at
    ``(phi[i], theta[k])``.
    """
    if spec.d != 3:
        raise CapabilityError("width maps are drawn for d = 3", field="r")
    phi = np.linspace(0.0, math.pi, n_phi)
    theta = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    W = np.empty((n_phi, n_theta))
    for i, p in enumerate(phi):
        for k, th in enumerate(theta):
            W[i, k] = width(spec, unit_from_angles(p, th)).value
    return phi, theta, W


def critical_time(d, d_prime, mu):
    """Time at which the ``d``-dimensional single-input reach set's volume
    overtakes the ``d_prime``-dimensional one (same ``mu``)."""
    for name, v in (("d", d), ("d_prime", d_prime)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ValidationError(f"{name} must be a positive integer, got {v!r}", field=name)
    if d <= d_prime:
        raise ValidationError(f"need d > d_prime, got d={d}, d_prime={d_prime}", field="d", code="range")
    if not (isinstance(mu, (int, float)) and math.isfinite(mu)) or mu <= 0:
        raise ValidationError(f"mu must be positive, got {mu!r}", field="mu", code="range")
    prod = 1
    for k in range(d_prime, d):
        prod *= factorial(2 * k + 1) // factorial(k)
    s = d + d_prime + 1
    log_t = -2.0 / s * math.log(2 * mu) + 2.0 / ((d - d_prime) * s) * math.log(prod)
    return math.exp(log_t)


def bessel_i0(x):
    """Modified Bessel function ``I_0`` from its power series."""
    q = (x / 2.0) ** 2
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term < 1e-17 * total:
            return total


def asymptotics(kind, *, d=None, mu=1.0, t=1.0):
    """Large-dimension approximations for single-input chains.

    ``kind`` is ``"volume_d_to_inf"``, ``"tcr_d_to_inf"`` or
    ``"diameter_d_to_inf"``.
    """
    if kind == "volume_d_to_inf":
        if d is None or d < 1:
            raise ValidationError("volume asymptotic needs d >= 1", field="d")
        log_v = (
            d * math.log(2 * mu)
            + d * (d + 1) / 2 * math.log(t)
            + 1.5 * d * d + 1 / 12
            - math.log(GLAISHER)
            - (2 * d * d - 1 / 12) * math.log(2)
            - (d * d + 1 / 12) * math.log(d)
        )
        return math.exp(log_v)
    if kind == "tcr_d_to_inf":
        if d is None or d < 1:
            raise ValidationError("critical time asymptotic needs d >= 1", field="d")
        return 4 / math.e * d * mu ** (-1.0 / d) * 2 ** (-1.5 / d)
    if kind == "diameter_d_to_inf":
        return 2 * mu * math.sqrt(bessel_i0(2 * t) - 1)
    raise ValidationError(f"unknown asymptotic kind {kind!r}", field="kind")


@dataclass(frozen=True)
class SizeReport:
    volume: float
    diameter: float
    diameter_direction: np.ndarray
    per_block_volumes: tuple

    def to_dict(self):
        return {
            "volume": self.volume,
            "diameter": self.diameter,
            "diameter_direction": [float(v) for v in self.diameter_direction],
            "per_block_volumes": [float(v) for v in self.per_block_volumes],
        }


def size_report(spec):
    dia = diameter(spec)
    blocks = tuple(block_volumes(spec))
    return SizeReport(volume(spec), dia.value, dia.direction, blocks)


def single_chain(d, mu=1.0, t=1.0):
    return ReachSpec.create((d,), mu=mu, t=t)


def size_curve(kind, d_list, t_values, mu=1.0):
    """Rows ``(d, t, value)`` of volume or diameter for single chains."""
    if kind not in ("volume", "diameter"):
        raise ValidationError(f"kind must be volume or diameter, got {kind!r}", field="kind")
    rows = []
    for d in d_list:
        for t in t_values:
            spec = single_chain(int(d), mu, float(t))
            rows.append((int(d), float(t), volume(spec) if kind == "volume" else diameter(spec).value))
    return rows

"""Integrator systems in Brunovsky normal form and their moment vectors.

A system with relative degrees ``r = (r_1, ..., r_m)`` has ``d = sum(r)``
states. Block ``j`` is a chain of ``r_j`` integrators driven by input ``j``
through its last state. Everything here is a pure function of immutable
values.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational, Real

import numpy as np

from .errors import ValidationError

SCHEMA_VERSION = 1
MAX_DIMENSION = 32
MAX_EXACT_DIMENSION = 12

_SPEC_FIELDS = {"schema", "r", "alpha", "beta", "x0", "t"}


@lru_cache(maxsize=None)
def factorial(k):
    return math.factorial(k)


@lru_cache(maxsize=None)
def inv_factorial(k):
    """``1/k!`` rounded once to float."""
    return float(Fraction(1, math.factorial(k)))


def to_fraction(x):
    """Exact rational for ``x``; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValidationError(f"non-finite value {x!r}", code="non_finite")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


@dataclass(frozen=True)
class RelativeDegree:
    """Relative degree vector; ``d`` and ``m`` are derived."""

    r: tuple

    def __post_init__(self):
        r = tuple(self.r)
        if len(r) == 0:
            raise ValidationError("relative degree list is empty", field="r", code="invalid_degrees")
        for rj in r:
            if isinstance(rj, bool) or not isinstance(rj, (int, np.integer)) or rj < 1:
                raise ValidationError(
                    f"relative degrees must be positive integers, got {rj!r}",
                    field="r",
                    code="invalid_degrees",
                )
        object.__setattr__(self, "r", tuple(int(rj) for rj in r))

    @property
    def d(self):
        return sum(self.r)

    @property
    def m(self):
        return len(self.r)

    @property
    def offsets(self):
        """Start index of each block in the stacked state."""
        out, acc = [], 0
        for rj in self.r:
            out.append(acc)
            acc += rj
        return tuple(out)

    def blocks(self):
        return [slice(o, o + rj) for o, rj in zip(self.offsets, self.r)]


@dataclass(frozen=True, eq=False)
class IntegratorSystem:
    degrees: RelativeDegree
    A: np.ndarray
    B: np.ndarray

    # A and B are determined by the degrees
    def __eq__(self, other):
        if not isinstance(other, IntegratorSystem):
            return NotImplemented
        return self.degrees == other.degrees

    def __hash__(self):
        return hash(self.degrees)

    @property
    def d(self):
        return self.degrees.d

    @property
    def m(self):
        return self.degrees.m


def _as_degrees(degrees):
    if isinstance(degrees, RelativeDegree):
        return degrees
    if isinstance(degrees, (int, np.integer)):
        degrees = (degrees,)
    return RelativeDegree(tuple(degrees))


def build_system(degrees):
    """Block-diagonal shift matrices ``A`` and input matrix ``B``."""
    deg = _as_degrees(degrees)
    d, m = deg.d, deg.m
    A = np.zeros((d, d))
    B = np.zeros((d, m))
    for j, (o, rj) in enumerate(zip(deg.offsets, deg.r)):
        for k in range(rj - 1):
            A[o + k, o + k + 1] = 1.0
        B[o + rj - 1, j] = 1.0
    A.flags.writeable = False
    B.flags.writeable = False
    return IntegratorSystem(deg, A, B)


def transition_block(rj, dt):
    """``exp(dt * A_j)`` for a single chain of length ``rj`` (float)."""
    out = np.zeros((rj, rj))
    powers = [1.0]
    for p in range(1, rj):
        powers.append(powers[-1] * dt)
    for k in range(rj):
        for ell in range(k, rj):
            out[k, ell] = powers[ell - k] * inv_factorial(ell - k)
    return out


def state_transition(sys, dt, exact=False):
    """State transition matrix ``exp(dt * A)``.

    With ``exact=True`` the result is a list of lists of ``Fraction``; this
    mode is limited to ``d <= 12``.
    """
    if dt < 0:
        raise ValidationError(f"dt must be nonnegative, got {dt!r}", field="dt", code="range")
    deg = sys.degrees if isinstance(sys, IntegratorSystem) else _as_degrees(sys)
    d = deg.d
    if exact:
        if d > MAX_EXACT_DIMENSION:
            raise ValidationError(
                f"exact mode supports d <= {MAX_EXACT_DIMENSION}, got {d}", field="r", code="range"
            )
        q = to_fraction(dt)
        out = [[Fraction(0)] * d for _ in range(d)]
        for o, rj in zip(deg.offsets, deg.r):
            for k in range(rj):
                for ell in range(k, rj):
                    out[o + k][o + ell] = q ** (ell - k) / factorial(ell - k)
        return out
    out = np.zeros((d, d))
    for o, rj in zip(deg.offsets, deg.r):
        out[o:o + rj, o:o + rj] = transition_block(rj, float(dt))
    return out


def xi_block(rj, s):
    """``(s^{r-1}/(r-1)!, ..., s, 1)`` without range checks."""
    out = np.empty(rj)
    p = 1.0
    for i in range(rj - 1, -1, -1):
        out[i] = p * inv_factorial(rj - 1 - i)
        p *= s
    return out


def zeta_block(rj, t0, t1):
    """Componentwise integral of ``xi_block`` over ``[t0, t1]``."""
    out = np.empty(rj)
    for i in range(rj):
        e = rj - i
        out[i] = (t1 ** e - t0 ** e) * inv_factorial(e)
    return out


@dataclass(frozen=True)
class InputBox:
    """Box ``[alpha_1, beta_1] x ... x [alpha_m, beta_m]``."""

    alpha: tuple
    beta: tuple

    def __post_init__(self):
        alpha, beta = tuple(self.alpha), tuple(self.beta)
        if len(alpha) != len(beta):
            raise ValidationError(
                f"alpha has {len(alpha)} entries but beta has {len(beta)}", field="beta", code="shape"
            )
        for name, vals in (("alpha", alpha), ("beta", beta)):
            for v in vals:
                if isinstance(v, bool) or not isinstance(v, Real) or not math.isfinite(v):
                    raise ValidationError(f"{name} entries must be finite reals, got {v!r}", field=name)
        for j, (a, b) in enumerate(zip(alpha, beta)):
            if a > b:
                raise ValidationError(
                    f"alpha[{j}] = {a} exceeds beta[{j}] = {b}", field="alpha", code="alpha_gt_beta"
                )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def symmetric(cls, mu):
        mu = tuple(mu)
        return cls(tuple(-v for v in mu), mu)

    @property
    def m(self):
        return len(self.alpha)

    @property
    def mu(self):
        return tuple((b - a) / 2 for a, b in zip(self.alpha, self.beta))

    @property
    def nu(self):
        return tuple((b + a) / 2 for a, b in zip(self.alpha, self.beta))

    def mu_exact(self):
        return tuple((to_fraction(b) - to_fraction(a)) / 2 for a, b in zip(self.alpha, self.beta))

    def nu_exact(self):
        return tuple((to_fraction(b) + to_fraction(a)) / 2 for a, b in zip(self.alpha, self.beta))


@dataclass(frozen=True)
class ReachSpec:
    """System, input box, singleton initial state and horizon."""

    system: IntegratorSystem
    input: InputBox
    x0: tuple
    t: Real

    def __post_init__(self):
        d, m = self.system.d, self.system.m
        if self.input.m != m:
            raise ValidationError(
                f"input box has {self.input.m} channels but the system has {m}", field="alpha", code="shape"
            )
        x0 = tuple(self.x0)
        if len(x0) != d:
            raise ValidationError(f"x0 must have dimension {d}, got {len(x0)}", field="x0", code="shape")
        for v in x0:
            if isinstance(v, bool) or not isinstance(v, Real) or not math.isfinite(v):
                raise ValidationError(f"x0 entries must be finite reals, got {v!r}", field="x0")
        t = self.t
        if isinstance(t, bool) or not isinstance(t, Real) or not math.isfinite(t) or t <= 0:
            raise ValidationError(f"t must be a positive finite real, got {t!r}", field="t", code="range")
        if d > MAX_DIMENSION:
            raise ValidationError(f"d = {d} exceeds the supported d <= {MAX_DIMENSION}", field="r", code="range")
        object.__setattr__(self, "x0", x0)

    @classmethod
    def create(cls, r, alpha=None, beta=None, x0=None, t=1.0, mu=None):
        """Convenience constructor; ``mu`` gives a symmetric box."""
        system = build_system(r)
        if mu is not None:
            if isinstance(mu, Real):
                mu = (mu,) * system.m
            box = InputBox.symmetric(mu)
        else:
            if alpha is None or beta is None:
                alpha = (-1,) * system.m if alpha is None else alpha
                beta = (1,) * system.m if beta is None else beta
            box = InputBox(tuple(alpha), tuple(beta))
        if x0 is None:
            x0 = (0,) * system.d
        return cls(system, box, tuple(x0), t)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ValidationError("spec document must be a JSON object", field=None, code="schema")
        unknown = sorted(set(doc) - _SPEC_FIELDS)
        if unknown:
            raise ValidationError(f"unknown field(s): {', '.join(unknown)}", field=unknown[0], code="unknown_field")
        schema = doc.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValidationError(f"unsupported schema version {schema!r}", field="schema", code="schema")
        for key in ("r", "alpha", "beta", "x0", "t"):
            if key not in doc:
                raise ValidationError(f"missing required field '{key}'", field=key, code="missing_field")
        for key in ("r", "alpha", "beta", "x0"):
            if not isinstance(doc[key], list):
                raise ValidationError(f"'{key}' must be a list", field=key, code="schema")
        system = build_system(doc["r"])
        box = InputBox(tuple(doc["alpha"]), tuple(doc["beta"]))
        return cls(system, box, tuple(doc["x0"]), doc["t"])

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}", code="parse") from None
        return cls.from_dict(doc)

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "r": list(self.r),
            "alpha": list(self.input.alpha),
            "beta": list(self.input.beta),
            "x0": list(self.x0),
            "t": self.t,
        }

    @property
    def r(self):
        return self.system.degrees.r

    @property
    def d(self):
        return self.system.d

    @property
    def m(self):
        return self.system.m

    @property
    def mu(self):
        return self.input.mu

    @property
    def nu(self):
        return self.input.nu

    @property
    def x0_array(self):
        return np.asarray(self.x0, dtype=float)

    def blocks(self):
        return self.system.degrees.blocks()

    def with_t(self, t):
        return ReachSpec(self.system, self.input, self.x0, t)

    def with_x0(self, x0):
        return ReachSpec(self.system, self.input, tuple(x0), self.t)

    def block_spec(self, j):
        """Single-input spec for block ``j``."""
        sl = self.blocks()[j]
        return ReachSpec(
            build_system((self.r[j],)),
            InputBox((self.input.alpha[j],), (self.input.beta[j],)),
            self.x0[sl],
            self.t,
        )


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return ReachSpec.from_json(fh.read())


def free_response(spec):
    """``exp(tA) x0``: the state reached under zero input."""
    return state_transition(spec.system, spec.t) @ spec.x0_array


def _check_time(spec, s, name):
    if not (0 <= s <= spec.t):
        raise ValidationError(f"{name} = {s} outside [0, {spec.t}]", field=name, code="range")


def xi(spec, s, scaled=False):
    """Stacked ``xi(s)``; with ``scaled`` each block is weighted by ``mu_j``."""
    _check_time(spec, s, "s")
    parts = []
    for rj, mu in zip(spec.r, spec.mu):
        blk = xi_block(rj, float(s))
        parts.append(blk * float(mu) if scaled else blk)
    return np.concatenate(parts)


def zeta(spec, t0, t1, scaled=False):
    """Stacked integral of ``xi`` over ``[t0, t1]``."""
    if t0 < 0:
        raise ValidationError(f"t0 = {t0} is negative", field="t0", code="range")
    if t0 > t1:
        raise ValidationError(f"t0 = {t0} exceeds t1 = {t1}", field="t0", code="range")
    parts = []
    for rj, mu in zip(spec.r, spec.mu):
        blk = zeta_block(rj, float(t0), float(t1))
        parts.append(blk * float(mu) if scaled else blk)
    return np.concatenate(parts)

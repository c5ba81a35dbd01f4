"""Exact polynomial arithmetic over the rationals.

``UniPoly`` carries univariate polynomials (ascending coefficients) and is
used for the support-function integrands and for root isolation.
``MultiPoly`` is a sparse multivariate polynomial with ``Fraction``
coefficients; it carries the implicit boundary polynomials.
"""

import math
from collections import namedtuple
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from numbers import Rational

import numpy as np
from scipy.optimize import brentq

from .errors import NumericError, ValidationError

Root = namedtuple("Root", ["value", "even"])
Root.__doc__ = """A real root; ``even`` marks a root where the polynomial keeps its sign."""


def _is_exact(c):
    return isinstance(c, Rational)


class UniPoly:
    """Univariate polynomial with ascending coefficients ``c[0] + c[1] x + ...``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    def __repr__(self):
        return f"UniPoly({list(self.coeffs)!r})"

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def is_exact(self):
        return all(_is_exact(c) for c in self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self):
        return UniPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def antideriv(self):
        """Antiderivative vanishing at zero."""
        if self.is_exact():
            return UniPoly([0] + [Fraction(c) / (k + 1) for k, c in enumerate(self.coeffs)])
        return UniPoly([0.0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __add__(self, other):
        other = _as_unipoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_unipoly(other))

    def __rsub__(self, other):
        return _as_unipoly(other) - self

    def __mul__(self, other):
        other = _as_unipoly(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = _as_unipoly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        exact = self.is_exact() and other.is_exact()
        rem = [Fraction(c) if exact else c for c in self.coeffs]
        lead = Fraction(other.coeffs[-1]) if exact else other.coeffs[-1]
        dq = other.degree
        quot = [0] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            f = rem[k] / lead
            quot[k - dq] = f
            if f:
                for i, c in enumerate(other.coeffs):
                    rem[k - dq + i] -= f * c
            rem[k] = 0
        return UniPoly(quot), UniPoly(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        lead = Fraction(self.coeffs[-1]) if self.is_exact() else self.coeffs[-1]
        return UniPoly(c / lead for c in self.coeffs)


def _as_unipoly(x):
    return x if isinstance(x, UniPoly) else UniPoly([x])


def poly_gcd(a, b):
    """Monic gcd over the rationals."""
    a, b = _as_unipoly(a), _as_unipoly(b)
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def sturm_sequence(p):
    """Sturm chain ``p, p', -rem(p, p'), ...`` over the rationals."""
    p = _as_unipoly(p)
    seq = [p, p.deriv()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    seq.pop()
    return seq


def sign_variations(seq, x):
    signs = [v for v in (q(x) for q in seq) if v != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def _sign(v):
    return (v > 0) - (v < 0)


def _multiplicity(p, x):
    k, q = 0, p
    while not q.is_zero() and q(x) == 0:
        q = q.deriv()
        k += 1
    return k


def _exact_roots(p, lo, hi, tol):
    q = p // poly_gcd(p, p.deriv())
    seq = sturm_sequence(q)
    tol = Fraction(tol)
    found = []
    if q(lo) == 0:
        found.append((lo, _multiplicity(p, lo) % 2 == 0))
    stack = [(lo, hi, sign_variations(seq, lo) - sign_variations(seq, hi))]
    while stack:
        a, b, count = stack.pop()
        if count == 0:
            continue
        if count > 1:
            mid = (a + b) / 2
            stack.append((mid, b, sign_variations(seq, mid) - sign_variations(seq, b)))
            stack.append((a, mid, sign_variations(seq, a) - sign_variations(seq, mid)))
            continue
        # exactly one distinct root in (a, b]
        if q(b) == 0:
            found.append((b, _multiplicity(p, b) % 2 == 0))
            continue
        exact_hit = None
        # a may be a root found by an earlier split; step off it
        while q(a) == 0:
            mid = (a + b) / 2
            if q(mid) == 0:
                exact_hit = mid
                break
            if sign_variations(seq, mid) - sign_variations(seq, b) == 1:
                a = mid
            else:
                b = mid
        if exact_hit is not None:
            found.append((exact_hit, _multiplicity(p, exact_hit) % 2 == 0))
            continue
        sa = _sign(q(a))
        while b - a > tol:
            mid = (a + b) / 2
            sm = _sign(q(mid))
            if sm == 0:
                exact_hit = mid
                break
            if sm == sa:
                a = mid
            else:
                b = mid
        if exact_hit is not None:
            found.append((exact_hit, _multiplicity(p, exact_hit) % 2 == 0))
        else:
            # (a, b) brackets exactly one distinct root of p and neither end is a root
            found.append(((a + b) / 2, _sign(p(a)) == _sign(p(b))))
    found.sort()
    return [Root(float(x), even) for x, even in found]


def _horner(c, x):
    acc = 0.0
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _abs_scale(c, x):
    ax = abs(x)
    acc = 0.0
    for v in reversed(c):
        acc = acc * ax + abs(v)
    return acc


def _float_roots(c, lo, hi, tol):
    """Roots of the float polynomial ``c`` in ``[lo, hi]``.

    Real roots of ``p`` are separated by the roots of ``p'`` (Rolle), so the
    critical points found recursively split ``[lo, hi]`` into monotone pieces,
    each holding at most one sign change.
    """
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg == 1:
        x = -c[0] / c[1] + 0.0
        return [Root(x, False)] if lo <= x <= hi else []
    dc = [k * v for k, v in enumerate(c) if k > 0]
    crit = [r.value for r in _float_roots(dc, lo, hi, tol)]
    knots = [lo] + [x for x in crit if lo < x < hi] + [hi]
    vals = [_horner(c, x) for x in knots]
    eps = 8 * (deg + 1) * np.finfo(float).eps
    roots = []
    for i in range(len(knots) - 1):
        a, b, fa, fb = knots[i], knots[i + 1], vals[i], vals[i + 1]
        if fa * fb < 0:
            x = brentq(lambda s: _horner(c, s), a, b, xtol=tol, rtol=4 * np.finfo(float).eps)
            roots.append(Root(x, False))
    for i, (x, v) in enumerate(zip(knots, vals)):
        # tangency closer than tol counts as a root
        floor = _abs_scale(c, max(1.0, abs(x))) * tol * tol
        if abs(v) > eps * _abs_scale(c, x) + floor:
            continue
        # (near-)zero at a knot: parity from the signs on either side
        left = vals[i - 1] if i > 0 else None
        right = vals[i + 1] if i + 1 < len(vals) else None
        if left is not None and right is not None:
            if left * right < 0:
                if v != 0:
                    continue  # the sign change was already bracketed
                roots.append(Root(x, False))
            else:
                roots.append(Root(x, True))
        else:
            # endpoint: even when the slope vanishes there as well
            slope = _horner(dc, x)
            roots.append(Root(x, bool(abs(slope) <= eps * _abs_scale(dc, x))))
    roots.sort()
    out = []
    for r in roots:
        if out and abs(r.value - out[-1].value) <= 2 * tol:
            if out[-1].even and not r.even:
                out[-1] = r
            continue
        out.append(r)
    return out


def real_roots_in_interval(p, lo, hi, tol=1e-13):
    """All real roots of ``p`` in ``[lo, hi]``, sorted, each within ``tol``.

    Rational coefficients and bounds take the exact Sturm path; anything
    else uses derivative bracketing in floating point. Roots of even
    multiplicity (no sign change) come back with ``even=True``.
    """
    p = p if isinstance(p, UniPoly) else UniPoly(p)
    if not hi > lo:
        raise ValidationError(f"empty interval [{lo}, {hi}]", field="hi", code="range")
    if p.is_zero():
        raise ValidationError("identically zero polynomial", field="p", code="zero_polynomial")
    if p.is_exact() and _is_exact(lo) and _is_exact(hi):
        return _exact_roots(
            UniPoly(Fraction(c) for c in p.coeffs), Fraction(lo), Fraction(hi), tol
        )
    c = [float(v) for v in p.coeffs]
    if not all(math.isfinite(v) for v in c):
        raise NumericError("non-finite polynomial coefficient")
    return _float_roots(c, float(lo), float(hi), tol)


# ---------------------------------------------------------------------------
# multivariate


def _coerce_coeff(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, Rational):
        return Fraction(int(c.numerator), int(c.denominator))
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"MultiPoly coefficients must be rational, got {type(c).__name__}")


class MultiPoly:
    """Sparse polynomial over ``Q`` in named variables.

    ``terms`` maps exponent tuples (one entry per variable) to nonzero
    ``Fraction`` coefficients.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, variables, terms=None):
        self.vars = tuple(variables)
        n = len(self.vars)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != n:
                raise ValidationError(
                    f"exponent {e} has arity {len(e)}, expected {n}", field="terms", code="shape"
                )
            if any(k < 0 for k in e):
                raise ValidationError(f"negative exponent in {e}", field="terms")
            c = _coerce_coeff(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, variables, c):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, name):
        variables = tuple(variables)
        e = tuple(1 if v == name else 0 for v in variables)
        if sum(e) != 1:
            raise ValidationError(f"unknown variable {name!r}", field="vars")
        return cls(variables, {e: 1})

    @classmethod
    def generators(cls, variables):
        return [cls.variable(variables, v) for v in variables]

    # basic protocol ---------------------------------------------------
    def __repr__(self):
        return f"MultiPoly({self.vars!r}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, Rational):
            return self == MultiPoly.constant(self.vars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    @property
    def nvars(self):
        return len(self.vars)

    def copy(self):
        return MultiPoly(self.vars, dict(self.terms))

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise ValidationError(
                    f"variable mismatch {self.vars} vs {other.vars}", field="vars", code="shape"
                )
            return other
        if isinstance(other, Rational):
            return MultiPoly.constant(self.vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return _raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return _raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Rational):
            c0 = _coerce_coeff(other)
            if not c0:
                return _raw(self.vars, {})
            return _raw(self.vars, {e: c * c0 for e, c in self.terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return _raw(self.vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Rational):
            return NotImplemented
        return self * (Fraction(1) / _coerce_coeff(other))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValidationError("exponent must be a nonnegative integer", field="k")
        out = MultiPoly.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # structure --------------------------------------------------------
    def total_degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def weighted_degree(self, weights):
        return max((sum(w * k for w, k in zip(weights, e)) for e in self.terms), default=-1)

    def leading_term(self, priority=None):
        """Lexicographically largest exponent and its coefficient.

        ``priority`` lists variable names from most to least significant;
        the default is the declared variable order.
        """
        if not self.terms:
            raise ValidationError("zero polynomial has no leading term", field="p", code="zero_polynomial")
        idx = list(range(self.nvars)) if priority is None else [self.vars.index(v) for v in priority]
        e = max(self.terms, key=lambda e: tuple(e[i] for i in idx))
        return e, self.terms[e]

    def monic(self, priority=None):
        _, c = self.leading_term(priority)
        return self / c

    def rename(self, variables):
        """Same polynomial with its variables renamed positionally."""
        variables = tuple(variables)
        if len(variables) != self.nvars:
            raise ValidationError("rename needs one name per variable", field="vars", code="shape")
        return _raw(variables, dict(self.terms))

    def reorder(self, variables):
        """Same polynomial expressed over a permutation of its variables."""
        variables = tuple(variables)
        if sorted(variables) != sorted(self.vars):
            raise ValidationError("reorder must permute the existing variables", field="vars")
        perm = [self.vars.index(v) for v in variables]
        return _raw(variables, {tuple(e[i] for i in perm): c for e, c in self.terms.items()})

    def compose(self, substitutions):
        """Substitute polynomial ``substitutions[i]`` for variable ``i``."""
        if len(substitutions) != self.nvars:
            raise ValidationError("one substitution per variable is required", field="vars", code="shape")
        target = substitutions[0].vars
        powers = [[MultiPoly.constant(target, 1)] for _ in substitutions]
        out = MultiPoly(target)
        for e, c in self.terms.items():
            term = MultiPoly.constant(target, c)
            for i, k in enumerate(e):
                while len(powers[i]) <= k:
                    powers[i].append(powers[i][-1] * substitutions[i])
                if k:
                    term = term * powers[i][k]
            out = out + term
        return out

    # evaluation -------------------------------------------------------
    def __call__(self, *values):
        if len(values) == 1 and not isinstance(values[0], (int, float, Fraction)):
            values = values[0]
        if isinstance(values, dict):
            values = [values[v] for v in self.vars]
        values = list(values)
        if len(values) != self.nvars:
            raise ValidationError(f"expected {self.nvars} values, got {len(values)}", field="values", code="shape")
        powers = [{0: 1} for _ in values]
        acc = 0
        for e, c in self.terms.items():
            term = c if all(_is_exact(v) for v in values) else float(c)
            for i, k in enumerate(e):
                if k:
                    pw = powers[i]
                    if k not in pw:
                        pw[k] = values[i] ** k
                    term = term * pw[k]
            acc = acc + term
        return acc

    def evaluate_array(self, X):
        """Float evaluation at the rows of ``X`` (shape ``(n, nvars)``)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.nvars:
            raise ValidationError(f"expected {self.nvars} columns", field="X", code="shape")
        out = np.zeros(X.shape[0])
        for e, c in self.terms.items():
            term = np.full(X.shape[0], float(c))
            for i, k in enumerate(e):
                if k:
                    term = term * X[:, i] ** k
            out += term
        return out

    def to_unipoly(self):
        """Coefficients of a univariate ``MultiPoly`` as a ``UniPoly``."""
        if self.nvars != 1:
            raise ValidationError("to_unipoly needs a univariate polynomial", field="vars", code="shape")
        deg = max((e[0] for e in self.terms), default=-1)
        coeffs = [Fraction(0)] * (deg + 1)
        for e, c in self.terms.items():
            coeffs[e[0]] = c
        return UniPoly(coeffs)

    # serialization ----------------------------------------------------
    def to_dict(self):
        return {
            "vars": list(self.vars),
            "terms": [
                {"e": list(e), "c": str(self.terms[e])} for e in sorted(self.terms, reverse=True)
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            variables = doc["vars"]
            terms = {tuple(t["e"]): Fraction(str(t["c"])) for t in doc["terms"]}
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed polynomial document: {exc}", field="terms", code="schema") from None
        return cls(variables, terms)


def _raw(variables, terms):
    p = MultiPoly.__new__(MultiPoly)
    p.vars = variables
    p.terms = terms
    return p


def series_exp(lams, order):
    """Coefficients ``A_0..A_order`` of ``exp(-sum_k lams[k-1] tau^k / k)``.

    ``lams`` holds ``MultiPoly`` values (typically the indeterminates
    ``lambda_1..lambda_d``); all must share a variable set. Uses
    ``n A_n = -sum_k lambda_k A_{n-k}``, which follows from ``F' = F G'``.
    """
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}", field="order", code="range")
    lams = list(lams)
    if not lams:
        raise ValidationError("need at least one coefficient", field="lams")
    variables = next((c.vars for c in lams if isinstance(c, MultiPoly)), ())
    lams = [c if isinstance(c, MultiPoly) else MultiPoly.constant(variables, c) for c in lams]
    A = [MultiPoly.constant(variables, 1)]
    for n in range(1, order + 1):
        acc = MultiPoly(variables)
        for k in range(1, min(n, len(lams)) + 1):
            acc = acc + lams[k - 1] * A[n - k]
        A.append(acc * Fraction(-1, n))
    return A


def poly_matrix_det(M):
    """Exact determinant of a square matrix of ``MultiPoly`` entries.

    Laplace expansion along the first column with memoized minors, so the
    cost is ``O(n 2^n)`` polynomial products; the Hankel matrices used for
    implicitization are at most 4x4.
    """
    rows = [list(r) for r in M]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValidationError("determinant needs a non-empty square matrix", field="M", code="shape")
    variables = next((c.vars for r in rows for c in r if isinstance(c, MultiPoly)), ())
    rows = [[c if isinstance(c, MultiPoly) else MultiPoly.constant(variables, c) for c in r] for r in rows]
    for r in rows:
        for c in r:
            if c.vars != variables:
                raise ValidationError("matrix entries must share a variable set", field="M", code="shape")

    @lru_cache(maxsize=None)
    def minor(col, row_set):
        # determinant of rows `row_set` (sorted tuple) and columns col..n-1
        if col == n:
            return MultiPoly.constant(variables, 1)
        acc = MultiPoly(variables)
        for pos, i in enumerate(row_set):
            entry = rows[i][col]
            if entry.is_zero():
                continue
            rest = row_set[:pos] + row_set[pos + 1:]
            term = entry * minor(col + 1, rest)
            acc = acc - term if pos % 2 else acc + term
        return acc

    return minor(0, tuple(range(n)))


def hankel_indices(d):
    """Index grid ``d - 2 delta + i + j`` of the vanishing Hankel determinant."""
    delta = (d - 1) // 2
    base = d - 2 * delta
    return [[base + i + j for j in range(delta + 1)] for i in range(delta + 1)]


def elementary_subsets(n, k):
    return combinations(range(n), k)


def cauchy_bound(p):
    """Every complex root of ``p`` has modulus below this rational bound."""
    p = _as_unipoly(p)
    lead = Fraction(p.coeffs[-1]) if p.is_exact() else p.coeffs[-1]
    return 1 + max((abs(Fraction(c) / lead if p.is_exact() else c / lead) for c in p.coeffs[:-1]), default=0)


def count_real_roots(p):
    """Number of distinct real roots, from Sturm sign variations at +-infinity."""
    p = UniPoly(Fraction(c) for c in _as_unipoly(p).coeffs)
    if p.is_zero():
        raise ValidationError("identically zero polynomial", field="p", code="zero_polynomial")
    seq = sturm_sequence(p // poly_gcd(p, p.deriv()))

    def at_inf(sign):
        signs = [_sign(q.coeffs[-1]) * (sign ** q.degree) for q in seq]
        return sum(1 for u, v in zip(signs, signs[1:]) if u != v)

    return at_inf(-1) - at_inf(1)

"""Truncated Novikov series with rational exponents.

A :class:`NovikovSeries` is a finite sum ``sum a_k T^(lambda_k)`` together
with a truncation order ``N``: every exponent ``>= N`` is unknown and dropped.
``N`` may be ``math.inf`` for a series known exactly.

Coefficients live in one of two modes:

* exact: :class:`fractions.Fraction` or :class:`GaussianRational`
  (complex numbers with rational real and imaginary parts);
* float: Python ``complex``. Coefficients with ``abs(c) <= FLOAT_TOL`` are
  discarded as numerical zero.

Mixing an exact and a float operand produces a float result, so
``series.exact`` records which mode produced a value.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import DegenerateSeed, NotAUnit, TruncationTooShort

INF = math.inf
FLOAT_TOL = 1e-10


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts.

    Arithmetic with ``Fraction`` or ``int`` stays exact; arithmetic with a
    Python ``complex`` or ``float`` degrades to ``complex``. Results with
    zero imaginary part are returned as plain ``Fraction``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _norm(re, im):
        if im == 0:
            return Fraction(re)
        return GaussianRational(re, im)

    @staticmethod
    def _parts(other):
        if isinstance(other, GaussianRational):
            return other.re, other.im
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return complex(self) + other
        return self._norm(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return complex(self) - other
        return self._norm(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return other - complex(self)
        return self._norm(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return complex(self) * other
        a, b = self.re, self.im
        c, d = p
        return self._norm(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return complex(self) / other
        c, d = p
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero")
        a, b = self.re, self.im
        return self._norm((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return other / complex(self)
        return GaussianRational(*p) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, k):
        if not isinstance(k, int):
            return complex(self) ** k
        if k < 0:
            return 1 / (self ** (-k))
        out = Fraction(1)
        base = self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            if isinstance(other, (complex, float)):
                return complex(self) == other
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_coeff(self)


Coeff = Union[Fraction, GaussianRational, complex]
Exp = Union[Fraction, float]


def as_exponent(x) -> Fraction:
    """Coerce ``x`` (int, Fraction, ``"p/q"`` string) to an exact exponent."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str, Rational)):
        return Fraction(x)
    raise TypeError(f"exponents must be exact rationals, got {x!r}")


def as_coeff(x) -> Coeff:
    """Normalize a scalar to one of the supported coefficient types."""
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Rational)) and not isinstance(x, Fraction):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, GaussianRational):
        return x if x.im != 0 else x.re
    if isinstance(x, (float, complex)):
        return complex(x)
    try:
        return complex(x)
    except TypeError:
        raise TypeError(f"unsupported coefficient {x!r}") from None


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, GaussianRational))


def coeff_is_zero(c, tol: float = FLOAT_TOL) -> bool:
    if is_exact(c):
        return c == 0
    return abs(c) <= tol


def coeff_close(a, b, tol: float = 1e-9) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_float(x: float) -> str:
    return f"{x:.12g}"


def format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return format_rational(c)
    if isinstance(c, GaussianRational):
        re = "" if c.re == 0 else format_rational(c.re)
        im = format_rational(abs(c.im))
        sign = "-" if c.im < 0 else ("+" if re else "")
        return f"({re}{sign}{im}i)"
    c = complex(c)
    if c.imag == 0:
        return format_float(c.real)
    return f"({format_float(c.real)}{'+' if c.imag >= 0 else '-'}{format_float(abs(c.imag))}i)"


def coeff_to_json(c):
    """Rationals as ``"p/q"``; anything complex as ``[re, im]`` decimal strings."""
    if isinstance(c, Fraction):
        return format_rational(c)
    if isinstance(c, GaussianRational):
        return [format_rational(c.re), format_rational(c.im)]
    c = complex(c)
    return [format_float(c.real), format_float(c.imag)]


def _trunc_str(t) -> str:
    return "inf" if t == INF else format_rational(t)


class NovikovSeries:
    """Immutable truncated series ``sum a_k T^(lambda_k)  (mod T^N)``.

    ``terms`` is a tuple of ``(exponent, coefficient)`` pairs sorted strictly
    by exponent with no zero coefficients; every exponent is below
    ``truncation_order``.
    """

    __slots__ = ("_terms", "_trunc")

    def __init__(self, terms: Iterable | Mapping = (), truncation_order=INF,
                 tol: float = FLOAT_TOL):
        trunc = INF if truncation_order == INF else as_exponent(truncation_order)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Fraction, Coeff] = {}
        for e, c in items:
            e = as_exponent(e)
            if e >= trunc:
                continue
            c = as_coeff(c)
            acc[e] = acc[e] + c if e in acc else c
        clean = tuple(sorted((e, c) for e, c in acc.items() if not coeff_is_zero(c, tol)))
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_trunc", trunc)

    def __setattr__(self, name, value):
        raise AttributeError("NovikovSeries is immutable")

    # construction helpers
    @classmethod
    def constant(cls, c, truncation_order=INF) -> "NovikovSeries":
        return cls([(0, c)], truncation_order)

    @classmethod
    def monomial(cls, c, exponent, truncation_order=INF) -> "NovikovSeries":
        return cls([(exponent, c)], truncation_order)

    @classmethod
    def zero(cls, truncation_order=INF) -> "NovikovSeries":
        return cls((), truncation_order)

    # basic accessors
    @property
    def terms(self) -> tuple:
        return self._terms

    @property
    def truncation_order(self):
        return self._trunc

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for _, c in self._terms)

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def is_zero(self) -> bool:
        return not self._terms

    def valuation(self):
        """Smallest stored exponent; ``INF`` for the zero series."""
        return self._terms[0][0] if self._terms else INF

    def known_valuation(self):
        """Valuation, or the truncation order when all known terms vanish."""
        return self._terms[0][0] if self._terms else self._trunc

    def leading_coefficient(self):
        return self._terms[0][1] if self._terms else Fraction(0)

    def coefficient(self, exponent) -> Coeff:
        e = as_exponent(exponent)
        if e >= self._trunc:
            raise TruncationTooShort(f"T^{e} is beyond truncation order {self._trunc}")
        for ex, c in self._terms:
            if ex == e:
                return c
        return Fraction(0)

    def in_lambda0(self) -> bool:
        return self.known_valuation() >= 0

    def in_lambda_plus(self) -> bool:
        return self.known_valuation() > 0

    def truncate(self, order) -> "NovikovSeries":
        order = INF if order == INF else as_exponent(order)
        return NovikovSeries(self._terms, min(order, self._trunc))

    def shift(self, exponent) -> "NovikovSeries":
        """Multiply by ``T^exponent``."""
        e = as_exponent(exponent)
        return NovikovSeries([(x + e, c) for x, c in self._terms], self._trunc + e)

    def map_coefficients(self, f: Callable) -> "NovikovSeries":
        return NovikovSeries([(e, f(c)) for e, c in self._terms], self._trunc)

    def constant_term(self) -> Coeff:
        return self.coefficient(0) if self._trunc > 0 else Fraction(0)

    def positive_part(self) -> "NovikovSeries":
        return NovikovSeries([(e, c) for e, c in self._terms if e > 0], self._trunc)

    # arithmetic
    @staticmethod
    def _lift(x) -> "NovikovSeries":
        if isinstance(x, NovikovSeries):
            return x
        return NovikovSeries.constant(x)

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self._terms)
        for e, c in other._terms:
            acc[e] = acc[e] + c if e in acc else c
        return NovikovSeries(acc, min(self._trunc, other._trunc))

    __radd__ = __add__

    def __neg__(self):
        return NovikovSeries([(e, -c) for e, c in self._terms], self._trunc)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "NovikovSeries":
        c = as_coeff(c)
        return NovikovSeries([(e, a * c) for e, a in self._terms], self._trunc)

    def __mul__(self, other):
        if not isinstance(other, NovikovSeries):
            return self.scale(other)
        # Known precision of a product: the unknown tail of one factor is
        # multiplied by at least T^(valuation of the other factor).
        trunc = min(self._trunc + other.known_valuation(),
                    other._trunc + self.known_valuation())
        acc: dict[Fraction, Coeff] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = e1 + e2
                if e >= trunc:
                    continue
                p = c1 * c2
                acc[e] = acc[e] + p if e in acc else p
        return NovikovSeries(acc, trunc)

    __rmul__ = __mul__

    def __pow__(self, k: int, order=None):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return inverse(self, order) ** (-k)
        out = NovikovSeries.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
                if order is not None:
                    out = out.truncate(order)
            base = base * base
            if order is not None:
                base = base.truncate(order)
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, NovikovSeries):
            return self * inverse(other)
        return self.scale(1 / as_coeff(other))

    def __eq__(self, other):
        if not isinstance(other, NovikovSeries):
            try:
                other = NovikovSeries.constant(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms and self._trunc == other._trunc

    def __hash__(self):
        return hash((self._terms, self._trunc))

    def isclose(self, other, tol: float = 1e-9) -> bool:
        """Termwise comparison up to ``min`` of the two truncation orders."""
        other = self._lift(other)
        n = min(self._trunc, other._trunc)
        a, b = dict(self.truncate(n)._terms), dict(other.truncate(n)._terms)
        for e in set(a) | set(b):
            if not coeff_close(a.get(e, Fraction(0)), b.get(e, Fraction(0)), tol):
                return False
        return True

    def evaluate(self, t: float) -> complex:
        """Numeric value of the known part at a real ``T = t > 0``."""
        return sum(complex(c) * t ** float(e) for e, c in self._terms)

    # rendering
    def to_text(self) -> str:
        out = ""
        for e, c in self._terms:
            cs = format_coeff(c)
            neg = cs.startswith("-")
            if neg:
                cs = cs[1:]
            if e == 0:
                piece = cs
            else:
                mono = "T" if e == 1 else f"T^{format_rational(e)}"
                if Fraction(e).denominator != 1 or e < 0:
                    mono = f"T^({format_rational(e)})"
                piece = mono if cs == "1" else f"{cs}*{mono}"
            if not out:
                out = ("-" if neg else "") + piece
            else:
                out += (" - " if neg else " + ") + piece
        body = out or "0"
        if self._trunc != INF:
            body += f"  (mod T^{_trunc_str(self._trunc)})"
        return body

    def to_json(self) -> dict:
        return {
            "terms": [[format_rational(e), coeff_to_json(c)] for e, c in self._terms],
            "truncation_order": _trunc_str(self._trunc),
            "mode": self.mode,
        }

    def __repr__(self):
        return f"NovikovSeries({self.to_text()})"

    __str__ = to_text


def T(exponent=1, truncation_order=INF) -> NovikovSeries:
    """The monomial ``T^exponent``."""
    return NovikovSeries.monomial(1, exponent, truncation_order)


def valuation(a: NovikovSeries):
    return a.valuation()


def _resolve_order(a: NovikovSeries, order):
    n = a.truncation_order
    if order is not None:
        n = min(n, as_exponent(order))
    return n


def invert_unit(a: NovikovSeries, order=None) -> NovikovSeries:
    """Inverse of a unit of the valuation ring by a geometric series.

    Write ``a = a0 (1 + h)`` with ``h`` in the maximal ideal; then
    ``1/a = a0^-1 sum (-h)^k``, summed until ``h^k`` passes the order. The
    result is known to ``min(order, a.truncation_order)``.
    """
    if a.is_zero() or a.valuation() != 0:
        raise NotAUnit(f"valuation {a.valuation()} != 0")
    a0 = a.leading_coefficient()
    inv0 = 1 / a0
    h = a.positive_part().scale(inv0)
    n = _resolve_order(a, order)
    if h.is_zero():
        return NovikovSeries.constant(inv0, n)
    if n == INF:
        raise ValueError("inverting an infinite series needs a finite order")
    h = h.truncate(n)
    total = NovikovSeries.constant(1, n)
    power = NovikovSeries.constant(1, n)
    neg_h = -h
    while True:
        power = (power * neg_h).truncate(n)
        if power.is_zero():
            break
        total = total + power
    return total.scale(inv0).truncate(n)


def inverse(a: NovikovSeries, order=None) -> NovikovSeries:
    """Inverse in the Novikov field: ``(c T^v u)^-1 = c^-1 T^-v u^-1``."""
    if a.is_zero():
        raise ZeroDivisionError("inverse of the zero series")
    v = a.valuation()
    unit = a.shift(-v)
    rel = None if order is None else as_exponent(order) + v
    inv = invert_unit(unit, rel)
    return inv.shift(-v)


def exp_series(a: NovikovSeries, order=None) -> NovikovSeries:
    """``exp`` of an element of the valuation ring.

    A nonzero constant term is exponentiated numerically (float mode).
    """
    if a.known_valuation() < 0:
        raise ValueError("exp needs a series with non-negative exponents")
    a0 = a.constant_term()
    h = a.positive_part()
    n = _resolve_order(a, order)
    if coeff_is_zero(a0):
        lead: Coeff = Fraction(1)
    else:
        lead = cmath.exp(complex(a0))
    if h.is_zero():
        return NovikovSeries.constant(lead, n)
    if n == INF:
        raise ValueError("exp of an infinite series needs a finite order")
    h = h.truncate(n)
    total = NovikovSeries.constant(1, n)
    power = NovikovSeries.constant(1, n)
    k = 0
    while True:
        k += 1
        power = (power * h).truncate(n).scale(Fraction(1, k))
        if power.is_zero():
            break
        total = total + power
    return total.scale(lead)


def log_series(a: NovikovSeries, order=None) -> NovikovSeries:
    """Principal logarithm of a unit ``a0 (1 + h)``: ``Log a0 + sum (-1)^(k+1) h^k / k``."""
    if a.is_zero() or a.valuation() != 0:
        raise NotAUnit(f"log needs a unit, valuation is {a.valuation()}")
    a0 = a.leading_coefficient()
    h = a.positive_part().scale(1 / a0)
    n = _resolve_order(a, order)
    if a0 == 1:
        lead: Coeff = Fraction(0)
    else:
        lead = cmath.log(complex(a0))
    if h.is_zero():
        return NovikovSeries.constant(lead, n)
    if n == INF:
        raise ValueError("log of an infinite series needs a finite order")
    h = h.truncate(n)
    total = NovikovSeries.constant(lead, n)
    power = NovikovSeries.constant(1, n)
    k = 0
    while True:
        k += 1
        power = (power * h).truncate(n)
        if power.is_zero():
            break
        sign = 1 if k % 2 == 1 else -1
        total = total + power.scale(Fraction(sign, k))
    return total


def poly_eval(coeffs: Sequence, x: NovikovSeries, order) -> NovikovSeries:
    """Horner evaluation of ``sum coeffs[k] x^k`` truncated at ``order``."""
    acc = NovikovSeries.zero(order)
    for c in reversed(coeffs):
        acc = (acc * x + NovikovSeries._lift(c)).truncate(order)
    return acc


def hensel_root(coeffs: Sequence, seed, order, max_iter: int = 64,
                tol: float = 1e-8) -> NovikovSeries:
    """Lift a simple root of ``p mod T^+`` to a root of ``p`` modulo ``T^order``.

    ``coeffs[k]`` is the coefficient of ``x^k`` (a scalar or a series in
    the valuation ring). Newton's iteration doubles the valuation of the
    residual each step.
    """
    order = as_exponent(order)
    cs = [NovikovSeries._lift(c).truncate(order) for c in coeffs]
    if any(c.known_valuation() < 0 for c in cs):
        raise ValueError("coefficients must lie in the valuation ring")
    dcs = [c.scale(k) for k, c in enumerate(cs)][1:]
    seed = as_coeff(seed)
    red = [c.constant_term() for c in cs]
    dred = sum(k * c * seed ** (k - 1) for k, c in enumerate(red) if k > 0)
    if coeff_is_zero(dred, tol):
        raise DegenerateSeed(f"derivative of the reduction vanishes at {seed}")
    pval = sum(c * seed ** k for k, c in enumerate(red))
    if not coeff_is_zero(pval, max(tol, 1e-6)):
        raise DegenerateSeed(f"seed {seed} is not a root of the reduction (value {pval})")
    x = NovikovSeries.constant(seed, order)
    for _ in range(max_iter):
        r = poly_eval(cs, x, order)
        if r.is_zero():
            return x
        d = poly_eval(dcs, x, order)
        x = (x - r * invert_unit(d, order)).truncate(order)
    raise RuntimeError("Newton iteration did not converge")

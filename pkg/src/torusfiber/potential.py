"""The leading-order potential ``PO0 = sum_i y^{v_i} T^{l_i(u)}`` and its
leading term equations in level-adapted coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import NotInterior, ZeroCoordinate
from .locator import LevelBasis, LevelStructure, integer_basis, level_structure_at
from .novikov import (INF, NovikovSeries, as_coeff, coeff_is_zero, format_coeff,
                      format_rational, invert_unit, is_exact)
from .polytope import MomentPolytope

Exps = tuple[int, ...]


def _mono_text(exps: Exps, names: Sequence[str]) -> str:
    parts = []
    for e, nm in zip(exps, names):
        if e == 1:
            parts.append(nm)
        elif e != 0:
            parts.append(f"{nm}^{e}" if e > 0 else f"{nm}^({e})")
    return "*".join(parts)


class LPoly:
    """Laurent polynomial with scalar (exact or complex) coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exps, object] | None = None):
        self.n = n
        acc: dict[Exps, object] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            c = as_coeff(c)
            acc[e] = acc[e] + c if e in acc else c
        self.terms = {e: c for e, c in sorted(acc.items()) if not coeff_is_zero(c, 1e-14)}

    def __add__(self, other: "LPoly") -> "LPoly":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return LPoly(self.n, t)

    def __sub__(self, other: "LPoly") -> "LPoly":
        return self + other.scale(-1)

    def scale(self, c) -> "LPoly":
        c = as_coeff(c)
        return LPoly(self.n, {e: a * c for e, a in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    def log_derivative(self, j: int) -> "LPoly":
        return LPoly(self.n, {e: e[j] * c for e, c in self.terms.items()})

    def derivative(self, j: int) -> "LPoly":
        out = {}
        for e, c in self.terms.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                out[tuple(f)] = e[j] * c
        return LPoly(self.n, out)

    def variables(self) -> set[int]:
        return {j for e in self.terms for j in range(self.n) if e[j] != 0}

    def substitute(self, values: Mapping[int, object]) -> "LPoly":
        """Fix some variables; their exponents become zero."""
        out: dict[Exps, object] = {}
        for e, c in self.terms.items():
            f = list(e)
            for j, v in values.items():
                if e[j]:
                    c = c * (as_coeff(v) ** e[j])
                    f[j] = 0
            f = tuple(f)
            out[f] = out[f] + c if f in out else c
        return LPoly(self.n, out)

    def evaluate(self, point: Sequence):
        tot = Fraction(0)
        for e, c in self.terms.items():
            m = c
            for j, x in enumerate(e):
                if x:
                    if point[j] == 0:
                        raise ZeroCoordinate(f"coordinate {j} is zero")
                    m = m * (as_coeff(point[j]) ** x)
            tot = tot + m
        return tot

    def numeric(self, variables: Sequence[int]):
        """``(exponent matrix, coefficient vector)`` restricted to ``variables``."""
        if not self.terms:
            return np.zeros((0, len(variables)), dtype=int), np.zeros(0, dtype=complex)
        E = np.array([[e[j] for j in variables] for e in self.terms], dtype=int)
        c = np.array([complex(x) for x in self.terms.values()], dtype=complex)
        return E, c

    def to_text(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"y{j + 1}" for j in range(self.n)]
        if not self.terms:
            return "0"
        out = ""
        for e, c in self.terms.items():
            cs = format_coeff(c)
            neg = cs.startswith("-")
            if neg:
                cs = cs[1:]
            mono = _mono_text(e, names)
            piece = mono if (cs == "1" and mono) else (cs if not mono else f"{cs}*{mono}")
            if not out:
                out = ("-" if neg else "") + piece
            else:
                out += (" - " if neg else " + ") + piece
        return out

    def __eq__(self, other):
        return isinstance(other, LPoly) and self.n == other.n and self.terms == other.terms

    def __repr__(self):
        return f"LPoly({self.to_text()})"


class LaurentPolyNov:
    """Laurent polynomial in ``y_1..y_n`` with Novikov-series coefficients."""

    __slots__ = ("names", "terms")

    def __init__(self, names: Sequence[str], terms: Mapping[Exps, NovikovSeries] | None = None):
        self.names = tuple(names)
        acc: dict[Exps, NovikovSeries] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != len(self.names):
                raise ValueError("exponent vector length does not match variables")
            acc[e] = acc[e] + c if e in acc else c
        self.terms = {e: c for e, c in sorted(acc.items()) if not c.is_zero()}

    @property
    def n(self) -> int:
        return len(self.names)

    def __add__(self, other: "LaurentPolyNov") -> "LaurentPolyNov":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return LaurentPolyNov(self.names, t)

    def __sub__(self, other: "LaurentPolyNov") -> "LaurentPolyNov":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] - c if e in t else -c
        return LaurentPolyNov(self.names, t)

    def is_zero(self) -> bool:
        return not self.terms

    def log_derivative(self, j: int) -> "LaurentPolyNov":
        return LaurentPolyNov(self.names, {e: c.scale(e[j]) for e, c in self.terms.items() if e[j]})

    def derivative(self, j: int) -> "LaurentPolyNov":
        out = {}
        for e, c in self.terms.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                out[tuple(f)] = c.scale(e[j])
        return LaurentPolyNov(self.names, out)

    def evaluate(self, y: Sequence[NovikovSeries], order) -> NovikovSeries:
        """Substitute units ``y_j`` of the valuation ring, truncating at ``order``."""
        y = [NovikovSeries._lift(v) for v in y]
        inv = [None] * len(y)
        # inverses are computed once, at the precision of the lowest term
        low = min((c.known_valuation() for c in self.terms.values()), default=0)
        inv_rel = order - low if order != INF else INF
        total = NovikovSeries.zero(order)
        for e, c in self.terms.items():
            cv = c.known_valuation()
            rel = order - cv if order != INF else INF
            m = NovikovSeries.constant(1)
            for j, x in enumerate(e):
                if x == 0:
                    continue
                base = y[j]
                if x < 0:
                    if inv[j] is None:
                        if base.is_zero():
                            raise ZeroCoordinate(f"y{j + 1} is zero")
                        inv[j] = invert_unit(base, inv_rel if inv_rel != INF else None)
                    base = inv[j] if rel == INF else inv[j].truncate(rel)
                p = base.__pow__(abs(x), rel if rel != INF else None)
                m = m * p
                if rel != INF:
                    m = m.truncate(rel)
            total = total + (c * m).truncate(order)
        return total.truncate(order)

    def evaluate_numeric(self, y: Sequence[complex], t: float) -> complex:
        """Value at complex ``y`` with ``T`` replaced by a real number ``t``."""
        tot = 0j
        for e, c in self.terms.items():
            m = c.evaluate(t)
            for j, x in enumerate(e):
                m *= complex(y[j]) ** x
            tot += m
        return tot

    def leading_coefficients(self) -> dict[Exps, tuple[Fraction, object]]:
        return {e: (c.valuation(), c.leading_coefficient()) for e, c in self.terms.items()}

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for e, c in self.terms.items():
            mono = _mono_text(e, self.names) or "1"
            sign = "+"
            if len(c.terms) == 1 and c.truncation_order == INF:
                ex, a = c.terms[0]
                tpart = "" if ex == 0 else (f"T^({format_rational(ex)})")
                cs = format_coeff(a)
                if cs.startswith("-"):
                    sign, cs = "-", cs[1:]
                pieces = [p for p in (None if cs == "1" else cs, mono if mono != "1" or not tpart else None, tpart or None) if p]
                piece = "*".join(pieces) if pieces else "1"
            else:
                piece = f"({c.to_text()})*{mono}"
            if not out:
                out = piece if sign == "+" else "-" + piece
            else:
                out += f" {sign} {piece}"
        return out

    def __repr__(self):
        return f"LaurentPolyNov({self.to_text()})"


# PO0

@dataclass(frozen=True)
class ExtraTerm:
    """A higher-order correction ``coeff * prod_i zbar_i^{powers[i]} * T^rho``."""

    coefficient: object
    powers: tuple[int, ...]
    rho: Fraction

    def exponent(self, P: MomentPolytope) -> tuple[int, ...]:
        return tuple(sum(k * P.facets[i].normal[j] for i, k in enumerate(self.powers))
                     for j in range(P.dim))

    def t_power(self, P: MomentPolytope, u) -> Fraction:
        return sum((k * P.ell(i, u) for i, k in enumerate(self.powers)), Fraction(0)) + self.rho


def _vars(n: int) -> list[str]:
    return [f"y{j + 1}" for j in range(n)]


def build_po0(P: MomentPolytope, u: Sequence | None = None, extra_terms: Sequence[ExtraTerm] = (),
              allow_exterior: bool = False):
    """``PO0`` at a rational point ``u`` (or its symbolic form when ``u`` is None)."""
    if u is None:
        return SymbolicPO0(P)
    u = tuple(Fraction(x) for x in u)
    if not allow_exterior and not P.is_interior(u):
        raise NotInterior(f"u = {tuple(str(x) for x in u)} is not in the interior")
    terms: dict[Exps, NovikovSeries] = {}
    for i, f in enumerate(P.facets):
        terms[f.normal] = NovikovSeries.monomial(1, P.ell(i, u))
    po = LaurentPolyNov(_vars(P.dim), terms)
    for x in extra_terms:
        po = po + LaurentPolyNov(po.names, {x.exponent(P): NovikovSeries.monomial(x.coefficient, x.t_power(P, u))})
    return po


@dataclass(frozen=True)
class SymbolicPO0:
    polytope: MomentPolytope

    def to_text(self) -> str:
        P = self.polytope
        names = _vars(P.dim)
        parts = []
        for f in P.facets:
            lin = []
            for j, a in enumerate(f.normal):
                if a:
                    coef = "" if abs(a) == 1 else f"{abs(a)}*"
                    lin.append(("-" if a < 0 else "+") + coef + f"u{j + 1}")
            if f.offset:
                lin.append(("-" if f.offset > 0 else "+") + format_rational(abs(f.offset)))
            expr = "".join(lin).lstrip("+")
            parts.append(f"{_mono_text(f.normal, names)}*T^({expr})")
        return " + ".join(parts)


def gradient(po: LaurentPolyNov) -> list[LaurentPolyNov]:
    """Logarithmic derivatives ``y_j d/dy_j``."""
    return [po.log_derivative(j) for j in range(po.n)]


def zbar(P: MomentPolytope, u: Sequence, i: int) -> LaurentPolyNov:
    """The monomial ``y^{v_i} T^{l_i(u)}``."""
    return LaurentPolyNov(_vars(P.dim), {P.facets[i].normal: NovikovSeries.monomial(1, P.ell(i, u))})


# leading term equations

@dataclass(frozen=True)
class LevelSystem:
    k: int
    S: Fraction
    facets: tuple[int, ...]
    variables: tuple[int, ...]        # indices of the level-k basis variables
    potential: LPoly                  # F_k in level variables
    equations: tuple[LPoly, ...]      # y_b dF_k/dy_b for b in variables

    def plain_equations(self) -> tuple[LPoly, ...]:
        return tuple(self.potential.derivative(b) for b in self.variables)


@dataclass(frozen=True)
class LeadingTermSystem:
    polytope: MomentPolytope
    u: tuple[Fraction, ...]
    levels: LevelStructure
    basis: LevelBasis
    systems: tuple[LevelSystem, ...]
    extra_terms: tuple[ExtraTerm, ...] = field(default=())

    @property
    def names(self) -> list[str]:
        return self.basis.names()

    @property
    def n(self) -> int:
        return self.polytope.dim

    def level_po0(self) -> LaurentPolyNov:
        """``PO0`` rewritten in level variables."""
        P = self.polytope
        terms: dict[Exps, NovikovSeries] = {}
        for i in range(P.m):
            e = self.basis.coords[i]
            terms[e] = terms.get(e, NovikovSeries.zero()) + NovikovSeries.monomial(1, P.ell(i, self.u))
        po = LaurentPolyNov(self.names, terms)
        for x in self.extra_terms:
            e = self.to_level_exponent(x.exponent(P))
            po = po + LaurentPolyNov(self.names, {e: NovikovSeries.monomial(x.coefficient, x.t_power(P, self.u))})
        return po

    def to_level_exponent(self, v: Sequence[int]) -> Exps:
        """Coordinates of an exponent vector in the level basis."""
        n = self.n
        return tuple(sum(v[i] * self.basis.inverse[i][b] for i in range(n)) for b in range(n))

    def to_original_exponent(self, c: Sequence[int]) -> Exps:
        n = self.n
        return tuple(sum(c[b] * self.basis.vectors[b][i] for b in range(n)) for i in range(n))

    def to_original_values(self, values: Sequence) -> list:
        """Original coordinates ``y_i = prod_b y_b^{inverse[i][b]}`` of level values."""
        out = []
        for i in range(self.n):
            x = Fraction(1)
            for b, e in enumerate(self.basis.inverse[i]):
                if e:
                    x = x * (as_coeff(values[b]) ** e)
            out.append(x)
        return out

    def to_level_values(self, y: Sequence) -> list:
        out = []
        for b in range(self.n):
            x = Fraction(1)
            for i, e in enumerate(self.basis.vectors[b]):
                if e:
                    x = x * (as_coeff(y[i]) ** e)
            out.append(x)
        return out

    def render(self) -> list[str]:
        lines = []
        names = self.names
        subst = self.basis.substitution()
        lines.append("variables: " + ", ".join(f"{a} = {b}" for a, b in zip(names, subst)))
        for s in self.systems:
            eqs = "; ".join(f"{e.to_text(names)} = 0" for e in s.plain_equations())
            lines.append(f"level {s.k} (S = {format_rational(s.S)}): {eqs or '(no equations)'}")
        return lines


def leading_term_system(P: MomentPolytope, u: Sequence, levels: LevelStructure | None = None,
                        basis: LevelBasis | None = None, extra_terms: Sequence[ExtraTerm] = (),
                        allow_exterior: bool = False) -> LeadingTermSystem:
    u = tuple(Fraction(x) for x in u)
    if levels is None:
        levels = level_structure_at(P, u, allow_exterior=allow_exterior)
    if basis is None:
        basis = integer_basis(levels)
    n = P.dim
    systems = []
    for lv in levels.active:
        F = LPoly(n, {basis.coords[i]: 1 for i in lv.facets})
        idx = basis.indices_of_level(lv.k)
        eqs = tuple(F.log_derivative(b) for b in idx)
        systems.append(LevelSystem(lv.k, lv.S, lv.facets, idx, F, eqs))
    for x in extra_terms:
        if x.rho <= 0:
            raise ValueError("correction terms need a positive T-shift")
    return LeadingTermSystem(P, u, levels, basis, tuple(systems), tuple(extra_terms))


def hessian_blocks(sys: LeadingTermSystem, point: Sequence) -> list[np.ndarray]:
    """Per level, the matrix of second derivatives of ``F_k`` in the level-k variables."""
    if any(complex(x) == 0 for x in point):
        raise ZeroCoordinate("Hessian requested at a point with a zero coordinate")
    out = []
    for s in sys.systems:
        d = len(s.variables)
        H = np.zeros((d, d), dtype=complex)
        for a, ba in enumerate(s.variables):
            da = s.potential.derivative(ba)
            for c, bc in enumerate(s.variables):
                H[a, c] = complex(da.derivative(bc).evaluate(point))
        out.append(H)
    return out

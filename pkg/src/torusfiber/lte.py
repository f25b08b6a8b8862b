"""Solving leading term equations over the complex torus.

Levels are solved one at a time with lower-level values substituted:

* one variable: clear denominators and factor (exact coefficients) or take
  companion-matrix eigenvalues (float coefficients);
* two variables: eliminate one by a resultant, then back-substitute;
* three or more: seeded multi-start Newton with deflation. The root count is
  certified complete when it reaches the mixed volume of the Newton
  polytopes, otherwise the level is flagged ``completeness_unknown``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import sympy
from scipy.spatial import ConvexHull, QhullError
from sympy.polys.domains import QQ, QQ_I

from . import linalg
from .errors import DimensionUnsupported
from .novikov import GaussianRational, as_coeff, coeff_is_zero, format_coeff, format_rational, is_exact
from .polytope import MomentPolytope
from .potential import LPoly, LeadingTermSystem, hessian_blocks, leading_term_system

STRONG, WEAK, DEGENERATE = "strong", "weak", "degenerate"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-9
    hessian: float = 1e-8
    cluster: float = 1e-7


DEFAULT_TOL = Tolerances()


# scalar conversions

def _to_sympy(c):
    c = as_coeff(c)
    if isinstance(c, Fraction):
        return sympy.Rational(c.numerator, c.denominator)
    if isinstance(c, GaussianRational):
        return sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator)
    raise TypeError("only exact coefficients convert to sympy")


def _from_sympy(x):
    x = sympy.nsimplify(x) if not x.is_Rational else x
    re, im = sympy.re(x), sympy.im(x)
    if not (re.is_Rational and im.is_Rational):
        raise ValueError(f"{x} is not a Gaussian rational")
    return as_coeff(GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q))))


def _snap(z: complex, max_den: int = 10000):
    z = complex(z)
    return as_coeff(GaussianRational(Fraction(z.real).limit_denominator(max_den),
                                     Fraction(z.imag).limit_denominator(max_den)))


# numeric Laurent systems

class _NumSystem:
    """Fast complex evaluation of Laurent polynomials in ``d`` variables."""

    def __init__(self, polys: Sequence[LPoly]):
        self.parts = []
        for p in polys:
            E = np.array([list(e) for e in p.terms], dtype=float).reshape(len(p.terms), p.n)
            c = np.array([complex(x) for x in p.terms.values()], dtype=complex)
            self.parts.append((E, c))
        self.d = polys[0].n if polys else 0

    def f(self, y: np.ndarray) -> np.ndarray:
        return np.array([np.sum(c * np.prod(y[None, :] ** E, axis=1)) if len(c) else 0j
                         for E, c in self.parts])

    def jac(self, y: np.ndarray) -> np.ndarray:
        J = np.zeros((len(self.parts), self.d), dtype=complex)
        for r, (E, c) in enumerate(self.parts):
            if not len(c):
                continue
            mono = c * np.prod(y[None, :] ** E, axis=1)
            J[r] = (mono[:, None] * E).sum(axis=0) / y
        return J


def _newton(ns: _NumSystem, y0, iters: int = 60, tol: float = 1e-13, known=()):
    """Damped Newton with deflation of ``known`` roots; ``None`` on failure."""
    y = np.array(y0, dtype=complex)
    for _ in range(iters):
        if not np.all(np.isfinite(y)) or np.min(np.abs(y)) < 1e-8 or np.max(np.abs(y)) > 1e8:
            return None
        F = ns.f(y)
        if np.max(np.abs(F)) < tol:
            return y
        J = ns.jac(y)
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        if known:
            # deflation operator M(y) = prod (|y - r|^-2 + 1)
            dlog = 0.0
            for r in known:
                diff = y - r
                nrm2 = float(np.real(np.vdot(diff, diff)))
                if nrm2 == 0:
                    return None
                dlog += (-2.0 * float(np.real(np.vdot(diff, delta))) / nrm2 ** 2) / (1.0 / nrm2 + 1.0)
            denom = 1.0 - dlog
            if abs(denom) > 1e-12:
                delta = delta / denom
        step = np.max(np.abs(delta) / np.maximum(np.abs(y), 1e-3))
        if step > 0.5:
            delta = delta * (0.5 / step)
        y = y + delta
    F = ns.f(y)
    return y if np.all(np.isfinite(F)) and np.max(np.abs(F)) < 1e-10 else None


def _polish(ns: _NumSystem, y, iters: int = 8):
    y = np.array(y, dtype=complex)
    for _ in range(iters):
        F = ns.f(y)
        if np.max(np.abs(F), initial=0.0) < 1e-15:
            break
        J = ns.jac(y)
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        y_new = y + delta
        if np.max(np.abs(ns.f(y_new)), initial=0.0) >= np.max(np.abs(F), initial=0.0):
            break
        y = y_new
    return y


def _clean(z: complex, rel: float = 1e-13) -> complex:
    """Drop a real or imaginary part that is numerical noise."""
    m = abs(z)
    re = 0.0 if abs(z.real) <= rel * m else z.real
    im = 0.0 if abs(z.imag) <= rel * m else z.imag
    return complex(re, im)


def mixed_volume(supports: Sequence[Iterable[Sequence[int]]]) -> int:
    """Mixed volume of the convex hulls of ``d`` integer point sets in ``Z^d``.

    Inclusion-exclusion over Minkowski sums of the supports.
    """
    sets = [np.array(sorted(set(map(tuple, s))), dtype=float) for s in supports]
    d = len(sets)
    if d == 1:
        return int(round(sets[0].max() - sets[0].min()))
    total = 0.0
    for r in range(1, d + 1):
        for S in combinations(range(d), r):
            pts = np.zeros((1, d))
            for i in S:
                pts = np.unique((pts[:, None, :] + sets[i][None, :, :]).reshape(-1, d), axis=0)
            if len(pts) <= d or np.linalg.matrix_rank(pts - pts[0]) < d:
                vol = 0.0
            else:
                try:
                    vol = ConvexHull(pts).volume
                except QhullError:
                    vol = 0.0
            total += (-1) ** (d - r) * vol
    return int(round(total))


# per-level solving

@dataclass(frozen=True)
class LevelRoot:
    """One solution of a single level, given the lower-level values."""

    values: tuple            # values of the level's variables
    kind: str                # strong / weak / degenerate
    multiplicity: object     # int or "unknown"
    min_singular: float
    minimal_polynomials: tuple = ()   # per variable: coefficients, highest degree first
    family: bool = False


@dataclass
class LevelOutcome:
    k: int
    variables: tuple[int, ...]
    roots: list[LevelRoot]
    method: str
    flags: set = field(default_factory=set)
    mixed_volume: int | None = None


def _restrict(equations: Sequence[LPoly], fixed: dict, variables: Sequence[int]) -> list[LPoly]:
    out = []
    for eq in equations:
        s = eq.substitute(fixed) if fixed else eq
        terms = {}
        for e, c in s.terms.items():
            assert all(e[j] == 0 for j in range(len(e)) if j not in variables), \
                "equation depends on a higher level"
            terms[tuple(e[b] for b in variables)] = c
        out.append(LPoly(len(variables), terms))
    return out


def _cleared(p: LPoly) -> dict[tuple[int, ...], object]:
    """Exponents shifted so that each variable's smallest power is zero."""
    if not p.terms:
        return {}
    mins = [min(e[j] for e in p.terms) for j in range(p.n)]
    return {tuple(x - m for x, m in zip(e, mins)): c for e, c in p.terms.items()}


def _sym_poly(p: LPoly, gens, domain):
    expr = sum((_to_sympy(c) * sympy.Mul(*[g ** x for g, x in zip(gens, e)])
                for e, c in _cleared(p).items()), sympy.Integer(0))
    return sympy.Poly(expr, *gens, domain=domain)


def _domain(polys: Sequence[LPoly]):
    gauss = any(isinstance(c, GaussianRational) for p in polys for c in p.terms.values())
    return QQ_I if gauss else QQ


def _poly_coeffs(f: sympy.Poly) -> tuple:
    lc = f.LC()
    return tuple(_from_sympy(sympy.nsimplify(c / lc)) for c in f.all_coeffs())


def _univariate_exact(p: LPoly):
    """``[(root, multiplicity, minimal polynomial)]`` or ``None`` for the zero polynomial."""
    x = sympy.Symbol("x")
    f = _sym_poly(p, (x,), _domain([p]))
    if f.is_zero:
        return None
    out = []
    _, factors = f.factor_list()
    for g, mult in factors:
        if g.degree() == 0 or (g.degree() == 1 and g.TC() == 0):
            continue
        coeffs = _poly_coeffs(g)
        if g.degree() == 1:
            out.append((-coeffs[1], mult, coeffs))
            continue
        cc = np.array([complex(c) for c in coeffs])
        for r in np.roots(cc):
            for _ in range(3):
                dr = np.polyval(np.polyder(cc), r)
                if dr != 0:
                    r = r - np.polyval(cc, r) / dr
            out.append((complex(r), mult, coeffs))
    return out


def _univariate_float(p: LPoly, tol: Tolerances):
    cl = _cleared(p)
    if not cl:
        return None
    deg = max(e[0] for e in cl)
    cc = np.zeros(deg + 1, dtype=complex)
    for e, c in cl.items():
        cc[deg - e[0]] += complex(c)
    scale = np.max(np.abs(cc))
    if scale < 1e-14:
        return None
    cc = cc / scale
    roots = [complex(r) for r in np.roots(cc) if abs(r) > 1e-12]
    groups: list[list[complex]] = []
    for r in sorted(roots, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        for g in groups:
            if abs(g[0] - r) < max(tol.cluster, 1e-5) * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    return [(complex(np.mean(g)), len(g), None) for g in groups]


def _numeric_resultant(p: LPoly, q: LPoly):
    """Coefficients (highest first) of ``res_{x2}(p, q)`` as a polynomial in ``x1``."""
    P, Q = _cleared(p), _cleared(q)
    dp1 = max(e[0] for e in P)
    dp2 = max(e[1] for e in P)
    dq1 = max(e[0] for e in Q)
    dq2 = max(e[1] for e in Q)
    bound = dp1 * dq2 + dq1 * dp2
    N = bound + 1

    def coeffs_in_x2(D, deg2, x1):
        v = np.zeros(deg2 + 1, dtype=complex)
        for e, c in D.items():
            v[deg2 - e[1]] += complex(c) * x1 ** e[0]
        return v

    vals = []
    pts = np.exp(2j * np.pi * np.arange(N) / N)
    for x1 in pts:
        a = coeffs_in_x2(P, dp2, x1)
        b = coeffs_in_x2(Q, dq2, x1)
        size = dp2 + dq2
        if size == 0:
            vals.append(1.0 + 0j)
            continue
        S = np.zeros((size, size), dtype=complex)
        for i in range(dq2):
            S[i, i:i + dp2 + 1] = a
        for i in range(dp2):
            S[dq2 + i, i:i + dq2 + 1] = b
        vals.append(np.linalg.det(S))
    c = np.fft.fft(np.array(vals)) / N   # c[k] = coefficient of x1^k
    return c[::-1]


def _roots_from_coeffs(cc: np.ndarray):
    cc = np.array(cc, dtype=complex)
    scale = np.max(np.abs(cc)) if len(cc) else 0.0
    if scale < 1e-12:
        return None
    cc = np.where(np.abs(cc) < 1e-10 * scale, 0, cc)
    nz = np.nonzero(cc)[0]
    cc = cc[nz[0]:]
    return [complex(r) for r in np.roots(cc) if abs(r) > 1e-10]


class LevelSolver:
    """Solves the equations of one level after lower-level substitution."""

    def __init__(self, tol: Tolerances = DEFAULT_TOL, seed: int = 0, max_starts: int = 400):
        self.tol = tol
        self.seed = seed
        self.max_starts = max_starts

    # entry point
    def solve(self, sys: LeadingTermSystem, k: int, fixed: dict) -> LevelOutcome:
        lvl = next(s for s in sys.systems if s.k == k)
        variables = lvl.variables
        d = len(variables)
        eqs = _restrict(lvl.equations, fixed, variables)
        exact_coeffs = all(p.exact for p in eqs)
        out = LevelOutcome(k, variables, [], method="none")
        if d == 0:
            out.roots = [LevelRoot((), STRONG, 1, float("inf"))]
            return out
        # a single monomial is never zero on the torus
        if any(len(p.terms) == 1 for p in eqs):
            out.method = "monomial"
            return out
        if d == 1:
            cands = self._solve_1(eqs[0], exact_coeffs, out)
        elif d == 2:
            cands = self._solve_2(eqs, exact_coeffs, out)
        else:
            cands = self._solve_newton(eqs, out)
        ns = _NumSystem(eqs)
        seen: list[np.ndarray] = []
        for vals, mult, minpolys, family in cands:
            vals = self._finish(eqs, ns, vals, exact_coeffs)
            vec = np.array([complex(v) for v in vals])
            if not family and np.max(np.abs(ns.f(vec))) > self.tol.residual * max(1.0, np.max(np.abs(vec))):
                continue
            if any(np.max(np.abs(vec - s)) < self.tol.cluster * max(1.0, np.max(np.abs(s))) for s in seen):
                continue
            seen.append(vec)
            out.roots.append(self._classify(sys, lvl, fixed, vals, mult, minpolys, family, ns, out))
        return out

    def _finish(self, eqs, ns, vals, exact_coeffs):
        if all(is_exact(v) for v in vals):
            return tuple(vals)
        y = _polish(ns, [complex(v) for v in vals])
        if exact_coeffs:
            snapped = [_snap(z) for z in y]
            if all(not coeff_is_zero(s, 0) for s in snapped) and all(
                    p.evaluate(snapped) == 0 for p in eqs):
                return tuple(snapped)
        return tuple(_clean(complex(z)) for z in y)

    def _classify(self, sys, lvl, fixed, vals, mult, minpolys, family, ns, out) -> LevelRoot:
        point = self._full_point(sys.n, fixed, lvl.variables, vals)
        H = hessian_blocks(_single(sys, lvl), point)[0]
        smin = float(np.linalg.svd(H, compute_uv=False).min()) if H.size else float("inf")
        if family:
            return LevelRoot(tuple(vals), DEGENERATE, UNKNOWN, smin, minpolys or (), True)
        if smin > self.tol.hessian:
            return LevelRoot(tuple(vals), STRONG, 1, smin, minpolys or ())
        if out.method in ("univariate", "resultant"):
            m = mult if isinstance(mult, int) and out.method == "univariate" else UNKNOWN
            return LevelRoot(tuple(vals), WEAK, m, smin, minpolys or ())
        isolated = self._basin_check(ns, np.array([complex(v) for v in vals]))
        if not isolated:
            out.flags.add("family")
        return LevelRoot(tuple(vals), WEAK if isolated else DEGENERATE, UNKNOWN, smin, minpolys or (),
                         family=not isolated)

    @staticmethod
    def _full_point(n, fixed, variables, vals):
        point = [Fraction(1)] * n
        for j, v in fixed.items():
            point[j] = v
        for b, v in zip(variables, vals):
            point[b] = v
        return point

    def _basin_check(self, ns, root):
        rng = np.random.default_rng(self.seed + 7)
        for _ in range(3):
            pert = rng.normal(size=root.shape) + 1j * rng.normal(size=root.shape)
            start = root + 1e-3 * pert / np.linalg.norm(pert) * max(1.0, np.linalg.norm(root))
            y = start
            for _ in range(200):
                J = ns.jac(y)
                y = y + np.linalg.lstsq(J, -ns.f(y), rcond=None)[0]
                if not np.all(np.isfinite(y)):
                    return False
            if np.linalg.norm(y - root) > 1e-6 * max(1.0, np.linalg.norm(root)):
                return False
        return True

    # d = 1
    def _solve_1(self, p: LPoly, exact_coeffs: bool, out: LevelOutcome):
        out.method = "univariate"
        roots = _univariate_exact(p) if exact_coeffs else _univariate_float(p, self.tol)
        if roots is None:
            out.flags.add("family")
            return [((Fraction(1),), UNKNOWN, (), True)]
        return [((r,), m, (mp,) if mp else (), False) for r, m, mp in roots]

    # d = 2
    def _solve_2(self, eqs: list[LPoly], exact_coeffs: bool, out: LevelOutcome):
        out.method = "resultant"
        if any(p.is_zero() for p in eqs):
            out.flags.add("family")
            nz = [p for p in eqs if not p.is_zero()]
            if not nz:
                return [((Fraction(1), Fraction(1)), UNKNOWN, (), True)]
            return [(vals, UNKNOWN, (), True) for vals in self._curve_points(nz[0], exact_coeffs)]
        if exact_coeffs:
            return self._solve_2_exact(eqs, out)
        return self._solve_2_float(eqs, out)

    def _curve_points(self, g: LPoly, exact_coeffs: bool):
        """Representatives of the curve ``g = 0``: fix one variable to 1."""
        free = 1 if any(e[1] for e in g.terms) else 0
        other = 1 - free
        sub = LPoly(2, g.terms).substitute({other: Fraction(1)})
        uni = LPoly(1, {(e[free],): c for e, c in sub.terms.items()})
        roots = (_univariate_exact(uni) if exact_coeffs else _univariate_float(uni, self.tol)) or []
        pts = []
        for r, _, _ in roots:
            v = [Fraction(1), Fraction(1)]
            v[free] = r
            pts.append(tuple(v))
        return pts

    def _solve_2_exact(self, eqs, out):
        x1, x2 = sympy.symbols("x1 x2")
        dom = _domain(eqs)
        p = _sym_poly(eqs[0], (x1, x2), dom)
        q = _sym_poly(eqs[1], (x1, x2), dom)
        g = sympy.gcd(p, q)
        cands = []
        if g.total_degree() > 0 and not _is_monomial(g):
            out.flags.add("family")
            gl = _from_sym_poly(g, 2)
            cands += [(v, UNKNOWN, (), True) for v in self._curve_points(gl, True)]
            p = sympy.div(p, g)[0]
            q = sympy.div(q, g)[0]
        R = sympy.resultant(p, q, x2)
        R = sympy.Poly(R, x1, domain=dom)
        if R.is_zero:
            out.flags.add("family")
            return cands
        uni = _from_sym_poly(R, 1)
        for r, _, mp in _univariate_exact(uni) or []:
            if is_exact(r):
                pr = sympy.Poly(p.as_expr().subs(x1, _to_sympy(r)), x2, domain=dom)
                qr = sympy.Poly(q.as_expr().subs(x1, _to_sympy(r)), x2, domain=dom)
                h = sympy.gcd(pr, qr)
                if h.is_zero:
                    h = pr if not pr.is_zero else qr
                if h.degree() <= 0:
                    continue
                for s, _, mp2 in _univariate_exact(_from_sym_poly(h, 1)) or []:
                    cands.append(((r, s), UNKNOWN, (mp, mp2), False))
            else:
                for s in self._second_coordinate(eqs, complex(r)):
                    cands.append(((r, s), UNKNOWN, (mp, ()), False))
        return cands

    def _second_coordinate(self, eqs, r: complex):
        vals = []
        p, q = [LPoly(2, e.terms).substitute({0: r}) for e in eqs]
        pu = LPoly(1, {(e[1],): c for e, c in p.terms.items()})
        qu = LPoly(1, {(e[1],): c for e, c in q.terms.items()})
        base, check = (pu, qu) if len(pu.terms) >= 2 else (qu, pu)
        for s, _, _ in _univariate_float(base, self.tol) or []:
            scale = max(1.0, max((abs(complex(c)) for c in check.terms.values()), default=1.0))
            if abs(complex(check.evaluate([s]))) < 1e-6 * scale:
                vals.append(s)
        return vals

    def _solve_2_float(self, eqs, out):
        coeffs = _numeric_resultant(eqs[0], eqs[1])
        roots = _roots_from_coeffs(coeffs)
        if roots is None:
            out.flags.add("family")
            return []
        cands = []
        for r in roots:
            for s in self._second_coordinate(eqs, r):
                cands.append(((r, s), UNKNOWN, (), False))
        return cands

    # d >= 3
    def _solve_newton(self, eqs, out):
        out.method = "newton"
        d = eqs[0].n
        mv = mixed_volume([list(_cleared(p).keys()) for p in eqs])
        out.mixed_volume = mv
        ns = _NumSystem(eqs)
        rng = np.random.default_rng(self.seed)
        roots: list[np.ndarray] = []
        simple = 0
        misses = 0
        for _ in range(self.max_starts):
            if simple >= mv:
                break
            start = np.exp(rng.normal(scale=0.5, size=d) + 2j * np.pi * rng.random(d))
            y = _newton(ns, start, known=tuple(roots))
            if y is None:
                misses += 1
                continue
            if any(np.linalg.norm(y - r) < 1e-6 * max(1.0, np.linalg.norm(r)) for r in roots):
                continue
            roots.append(y)
            smin = np.linalg.svd(ns.jac(y), compute_uv=False).min()
            if smin > self.tol.hessian:
                simple += 1
        if simple != mv:
            out.flags.add("completeness_unknown")
        return [(tuple(complex(v) for v in r), UNKNOWN, (), False) for r in roots]


def _is_monomial(g: sympy.Poly) -> bool:
    return len(g.terms()) == 1


def _from_sym_poly(f: sympy.Poly, n: int) -> LPoly:
    return LPoly(n, {tuple(e): _from_sympy(c) for e, c in f.terms()})


def _single(sys: LeadingTermSystem, lvl) -> LeadingTermSystem:
    return LeadingTermSystem(sys.polytope, sys.u, sys.levels, sys.basis, (lvl,))


def solve_level(sys: LeadingTermSystem, k: int, fixed_lower_levels: dict | None = None,
                tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> LevelOutcome:
    """All solutions of level ``k`` with lower-level variables fixed."""
    return LevelSolver(tol, seed).solve(sys, k, dict(fixed_lower_levels or {}))


# full solutions

@dataclass(frozen=True)
class LTESolution:
    values: tuple                 # level variables
    y: tuple                      # original coordinates
    residual: float
    degeneracy: str
    level_degeneracy: tuple[str, ...]
    multiplicity: object          # int or "unknown"
    min_singular: tuple[float, ...]
    minimal_polynomials: tuple = ()
    level_roots: tuple = ()

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.values)

    def to_json(self) -> dict:
        from .novikov import coeff_to_json
        return {
            "values": [coeff_to_json(v) for v in self.values],
            "y": [coeff_to_json(v) for v in self.y],
            "degeneracy": self.degeneracy,
            "levels": list(self.level_degeneracy),
            "multiplicity": self.multiplicity,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class Branch:
    """A path of the depth-first search: per-level roots, and where it stopped."""

    roots: tuple[LevelRoot, ...]
    levels: tuple[int, ...]            # level numbers of ``roots``
    failed_level: int | None           # first level with no solution, or None


@dataclass
class LTEResult:
    system: LeadingTermSystem
    solutions: list[LTESolution]
    branches: list[Branch]
    flags: set = field(default_factory=set)
    outcomes: list[LevelOutcome] = field(default_factory=list)

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    def count(self, kinds: Sequence[str] = (STRONG, WEAK)) -> int | None:
        """Solutions of the given kinds weighted by multiplicity; ``None`` if some multiplicity is unknown."""
        total = 0
        for s in self.solutions:
            if s.degeneracy in kinds:
                if s.multiplicity == UNKNOWN:
                    return None
                total += s.multiplicity
        return total

    def profile(self) -> dict[str, int]:
        out = {STRONG: 0, WEAK: 0, DEGENERATE: 0}
        for s in self.solutions:
            out[s.degeneracy] += 1
        return out


def _residual(sys: LeadingTermSystem, values) -> float:
    pt = [complex(v) for v in values]
    r = 0.0
    for s in sys.systems:
        for eq in s.equations:
            r = max(r, abs(complex(eq.evaluate(pt))))
    return r


def solve_full(sys: LeadingTermSystem, tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> LTEResult:
    """Depth-first product of the per-level solution sets."""
    solver = LevelSolver(tol, seed)
    levels = [s for s in sys.systems if s.variables]
    result = LTEResult(sys, [], [])

    def rec(i: int, fixed: dict, roots: tuple):
        if i == len(levels):
            result.branches.append(Branch(roots, tuple(s.k for s in levels), None))
            result.solutions.append(_assemble(sys, fixed, roots))
            return
        lvl = levels[i]
        outcome = solver.solve(sys, lvl.k, fixed)
        result.outcomes.append(outcome)
        result.flags |= outcome.flags
        if not outcome.roots:
            result.branches.append(Branch(roots, tuple(s.k for s in levels[:i]), lvl.k))
            return
        for root in outcome.roots:
            nxt = dict(fixed)
            for b, v in zip(lvl.variables, root.values):
                nxt[b] = v
            rec(i + 1, nxt, roots + (root,))

    rec(0, {}, ())
    return result


def _assemble(sys: LeadingTermSystem, fixed: dict, roots: tuple) -> LTESolution:
    values = tuple(fixed[b] for b in range(sys.n))
    kinds = tuple(r.kind for r in roots)
    if DEGENERATE in kinds:
        kind = DEGENERATE
    elif WEAK in kinds:
        kind = WEAK
    else:
        kind = STRONG
    mult: object = 1
    for r in roots:
        if r.multiplicity == UNKNOWN or mult == UNKNOWN:
            mult = UNKNOWN
        else:
            mult *= r.multiplicity
    y = tuple(sys.to_original_values(values))
    if not all(is_exact(v) for v in values):
        y = tuple(complex(v) for v in y)
    return LTESolution(values, y, _residual(sys, values), kind, kinds, mult,
                       tuple(r.min_singular for r in roots),
                       tuple(mp for r in roots for mp in r.minimal_polynomials), roots)


def solve_at(P: MomentPolytope, u, tol: Tolerances = DEFAULT_TOL, seed: int = 0,
             allow_exterior: bool = False) -> LTEResult:
    return solve_full(leading_term_system(P, u, allow_exterior=allow_exterior), tol, seed)


# counting balanced fibers

@dataclass(frozen=True)
class FiberCandidate:
    u: tuple[Fraction, ...]
    position: str                 # interior / boundary / exterior
    count: int | None             # strong + weak, with multiplicity
    profile: dict
    flags: tuple[str, ...]
    result: LTEResult = field(repr=False, compare=False, default=None)


@dataclass(frozen=True)
class FamilyStratum:
    sample: tuple[Fraction, ...]
    position: str
    solutions: int


@dataclass(frozen=True)
class BalancedCount:
    candidates: tuple[FiberCandidate, ...]
    families: tuple[FamilyStratum, ...]

    @property
    def interior(self) -> tuple[FiberCandidate, ...]:
        return tuple(c for c in self.candidates if c.position == "interior")

    @property
    def exterior(self) -> tuple[FiberCandidate, ...]:
        return tuple(c for c in self.candidates if c.position != "interior")

    @property
    def total(self) -> int | None:
        tot = 0
        for c in self.interior:
            if c.count is None:
                return None
            tot += c.count
        return tot


def _hyperplanes(P: MomentPolytope) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """Distinct hyperplanes ``l_i = l_j``, normalized."""
    seen = {}
    for i, j in combinations(range(P.m), 2):
        a = [Fraction(x - y) for x, y in zip(P.facets[i].normal, P.facets[j].normal)]
        b = P.facets[i].offset - P.facets[j].offset
        if not any(a):
            continue
        piv = next(x for x in a if x != 0)
        key = (tuple(x / piv for x in a), b / piv)
        seen[key] = None
    return sorted(seen)


def _candidate_points(P: MomentPolytope, planes) -> list[tuple[Fraction, ...]]:
    n = P.dim
    pts = set()
    for sub in combinations(planes, n):
        A = [list(a) for a, _ in sub]
        x = linalg.solve(A, [b for _, b in sub])
        if x is not None:
            pts.add(tuple(Fraction(v) for v in x))
    return sorted(pts)


def _line_samples(P: MomentPolytope, planes, points) -> list[tuple[Fraction, ...]]:
    """Midpoints and ray points of every line of the arrangement (plane case)."""
    out = set()
    for a, b in planes:
        on = sorted((p for p in points if sum(x * y for x, y in zip(a, p)) == b),
                    key=lambda p: (p[0] * -a[1] + p[1] * a[0]))
        direction = (-a[1], a[0])
        if not on:
            base = (b / a[0], Fraction(0)) if a[0] != 0 else (Fraction(0), b / a[1])
            out.add(base)
            continue
        for p, q in zip(on, on[1:]):
            out.add(tuple((x + y) / 2 for x, y in zip(p, q)))
        out.add(tuple(x - d for x, d in zip(on[0], direction)))
        out.add(tuple(x + d for x, d in zip(on[-1], direction)))
    return sorted(out)


def _solve_candidate(P, u, tol, seed) -> tuple[LTEResult | None, str]:
    pos = P.position(u)
    sys = leading_term_system(P, u, allow_exterior=True)
    return solve_full(sys, tol, seed), pos


def count_balanced(P: MomentPolytope, points: Sequence | None = None,
                   tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> BalancedCount:
    """Candidate fibers with LTE solutions.

    Without ``points``, every vertex of the arrangement ``{l_i = l_j}`` in
    ``R^n`` is tried (``n <= 2``); one-dimensional strata are sampled and only
    reported when they carry a family of solutions. Candidates outside the
    interior are returned separately and never counted.
    """
    families: list[FamilyStratum] = []
    if points is None:
        if P.dim > 2:
            raise DimensionUnsupported("arrangement enumeration needs n <= 2; pass explicit points")
        planes = _hyperplanes(P)
        points = _candidate_points(P, planes)
        if P.dim == 2:
            for s in _line_samples(P, planes, points):
                res, pos = _solve_candidate(P, s, tol, seed)
                if res.solutions:
                    families.append(FamilyStratum(s, pos, len(res.solutions)))
    cands = []
    for u in points:
        u = tuple(Fraction(x) for x in u)
        res, pos = _solve_candidate(P, u, tol, seed)
        if not res.solutions:
            continue
        flags = set(res.flags)
        if pos != "interior":
            flags.add("outside_polytope" if pos == "exterior" else "on_boundary")
        cands.append(FiberCandidate(u, pos, res.count(), res.profile(), tuple(sorted(flags)), res))
    return BalancedCount(tuple(cands), tuple(families))


def format_solution(sol: LTESolution) -> str:
    vals = ", ".join(format_coeff(v) for v in sol.y)
    m = sol.multiplicity
    return f"y = ({vals})  [{sol.degeneracy}, multiplicity {m}]"


def format_u(u) -> str:
    return "(" + ", ".join(format_rational(x) for x in u) + ")"

"""Lifting leading-term solutions to critical points over the Novikov ring,
and the PO threshold built on mod-T^N criticality checks.

In level coordinates the critical equations read ``E_b = 0`` with
``E_b = T^(-S_k(b)) * y_b dPO0/dy_b``, an element of the valuation ring whose
reduction is the leading term equation of variable ``b``. A strongly
nondegenerate solution has an invertible (block lower-triangular) reduced
Jacobian ``J0``, so each residual coefficient at the smallest remaining
exponent ``lam`` is cancelled by ``y += Delta * T^lam`` with
``J0 Delta = -c``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DegenerateHessian, NotInterior, ObstructedLift, TruncationTooShort
from .lte import DEFAULT_TOL, STRONG, LTESolution, Tolerances, solve_full
from .novikov import INF, NovikovSeries, as_exponent, invert_unit, is_exact
from .polytope import MomentPolytope
from .potential import ExtraTerm, LeadingTermSystem, build_po0, leading_term_system


# exponent monoid

@dataclass(frozen=True)
class ExponentMonoid:
    generators: tuple[Fraction, ...]

    def __post_init__(self):
        assert all(g > 0 for g in self.generators), "monoid generators must be positive"

    def stream(self, cap, limit: int | None = None) -> list[Fraction]:
        """Nonzero elements ``<= cap`` in increasing order (at most ``limit``)."""
        gens = sorted(set(self.generators))
        out: list[Fraction] = []
        if not gens:
            return out
        heap = list(gens)
        heapq.heapify(heap)
        seen = set(gens)
        while heap:
            x = heapq.heappop(heap)
            if x > cap or (limit is not None and len(out) >= limit):
                break
            out.append(x)
            for g in gens:
                y = x + g
                if y <= cap and y not in seen:
                    seen.add(y)
                    heapq.heappush(heap, y)
        return out


def exponent_monoid(sys: LeadingTermSystem) -> ExponentMonoid:
    P, u = sys.polytope, sys.u
    gens = set()
    S_vals = [s.S for s in sys.systems if s.variables]
    for S in S_vals:
        for i in range(P.m):
            x = P.ell(i, u) - S
            if x > 0:
                gens.add(x)
        for t in sys.extra_terms:
            x = t.t_power(P, u) - S
            if x > 0:
                gens.add(x)
    return ExponentMonoid(tuple(sorted(gens)))


def default_order(sys: LeadingTermSystem, elements: int = 10) -> Fraction:
    """The tenth monoid element or ``3 S_K``, whichever is smaller."""
    S_K = sys.levels.active[-1].S
    cap = 3 * S_K
    stream = exponent_monoid(sys).stream(cap, elements)
    if len(stream) >= elements:
        return min(stream[elements - 1], cap)
    return cap


# helpers

def _level_of_var(sys: LeadingTermSystem) -> list[Fraction]:
    S_of = {lv.k: lv.S for lv in sys.levels.levels}
    return [S_of[k] for k in sys.basis.level_of]


def _constant(ys: Sequence[NovikovSeries]) -> bool:
    return all(len(y.terms) <= 1 and y.valuation() in (0, INF) and y.truncation_order == INF for y in ys)


def _monomial(ys: Sequence[NovikovSeries], exps: Sequence[int], order) -> NovikovSeries:
    out = NovikovSeries.constant(1)
    ord_arg = None if order == INF else order
    for y, e in zip(ys, exps):
        if e == 0:
            continue
        base = y.truncate(order) if order != INF else y
        if e < 0:
            base = invert_unit(base, ord_arg)
        out = out * base.__pow__(abs(e), ord_arg)
        if order != INF:
            out = out.truncate(order)
    return out


def _normalized_residuals(sys, lp, ys, order_of):
    S = _level_of_var(sys)
    out = []
    for b in range(sys.n):
        N = order_of(b)
        if N <= 0:
            out.append(NovikovSeries.zero(max(N, 0)))
            continue
        raw_order = INF if N == INF else N + S[b]
        out.append(lp.log_derivative(b).evaluate(ys, raw_order).shift(-S[b]))
    return out


def _reduced_jacobian(sys: LeadingTermSystem, point) -> list[list]:
    n = sys.n
    J = [[Fraction(0)] * n for _ in range(n)]
    for s in sys.systems:
        for b, eq in zip(s.variables, s.equations):
            for bp in range(n):
                D = eq.derivative(bp)
                if D.terms:
                    J[b][bp] = D.evaluate(point)
    return J


def _solve_linear(A, rhs):
    if all(is_exact(x) for row in A for x in row) and all(is_exact(x) for x in rhs):
        x = linalg.solve(A, rhs)
        if x is None:
            raise DegenerateHessian("reduced Jacobian is singular")
        return x
    M = np.array([[complex(x) for x in row] for row in A])
    if np.linalg.svd(M, compute_uv=False).min() < 1e-12:
        raise DegenerateHessian("reduced Jacobian is singular")
    return [complex(x) for x in np.linalg.solve(M, np.array([complex(x) for x in rhs]))]


# lifting

@dataclass(frozen=True)
class LiftedCriticalPoint:
    u: tuple[Fraction, ...]
    y: tuple[NovikovSeries, ...]          # original coordinates
    y_level: tuple[NovikovSeries, ...]    # level coordinates
    order: object
    residual_valuation: object           # min valuation of the normalized equations
    critical_value: NovikovSeries
    steps: int
    exponents: tuple[Fraction, ...] = field(default=())   # correction exponents used

    @property
    def exact(self) -> bool:
        return all(y.exact for y in self.y) and self.critical_value.exact

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"


def lift_values(sys: LeadingTermSystem, values: Sequence, targets: Sequence, active: Sequence[int],
                max_steps: int = 1000) -> tuple[list[NovikovSeries], list[Fraction]]:
    """Newton-Hensel correction of the ``active`` level variables.

    ``targets[b]`` is the order to which ``E_b`` must vanish. Returns the
    corrected series (untruncated) and the exponents used.
    """
    lp = sys.level_po0()
    ys = [NovikovSeries.constant(v) for v in values]
    active = list(active)
    J = _reduced_jacobian(sys, list(values))
    Ja = [[J[b][bp] for bp in active] for b in active]
    used: list[Fraction] = []
    for _ in range(max_steps):
        res = _normalized_residuals(sys, lp, ys, lambda b: targets[b] if b in active else 0)
        lam = min((r.valuation() for b, r in enumerate(res) if b in active and not r.is_zero()),
                  default=INF)
        if lam == INF:
            return ys, used
        if lam <= 0:
            raise ObstructedLift(f"leading term equation fails at the base point (valuation {lam})")
        c = [res[b].coefficient(lam) if lam < targets[b] else Fraction(0) for b in active]
        delta = _solve_linear(Ja, [-x for x in c])
        for b, d in zip(active, delta):
            ys[b] = ys[b] + NovikovSeries.monomial(d, lam)
        used.append(lam)
    raise ObstructedLift("correction did not terminate")


def _level_to_original(sys: LeadingTermSystem, ys, order) -> list[NovikovSeries]:
    return [_monomial(ys, sys.basis.inverse[i], order) for i in range(sys.n)]


def _original_to_level(sys: LeadingTermSystem, ys, order) -> list[NovikovSeries]:
    return [_monomial(ys, sys.basis.vectors[b], order) for b in range(sys.n)]


def lift(sys: LeadingTermSystem, sol: LTESolution, order=None) -> LiftedCriticalPoint:
    """Lift a strongly nondegenerate solution so that every ``E_b`` vanishes mod ``T^order``."""
    if sol.degeneracy != STRONG:
        raise DegenerateHessian(f"solution is {sol.degeneracy}; only strong solutions lift")
    _check_extra_terms(sys)
    order = default_order(sys) if order is None else as_exponent(order)
    n = sys.n
    ys, used = lift_values(sys, sol.values, [order] * n, range(n))
    if _constant(ys):
        trunc = INF
    else:
        trunc = order
        ys = [y.truncate(order) for y in ys]
    lp = sys.level_po0()
    res = _normalized_residuals(sys, lp, ys, lambda b: order if trunc != INF else INF)
    resval = min(r.known_valuation() for r in res) if trunc != INF else min(
        (r.valuation() for r in res), default=INF)
    if resval < order:
        raise ObstructedLift(f"residual valuation {resval} below order {order}")
    S1 = sys.levels.levels[0].S
    cv = lp.evaluate(ys, INF if trunc == INF else order + S1)
    y_orig = _level_to_original(sys, ys, trunc)
    return LiftedCriticalPoint(sys.u, tuple(y_orig), tuple(ys), order, resval, cv, len(used), tuple(used))


def _check_extra_terms(sys: LeadingTermSystem) -> None:
    S = _level_of_var(sys)
    for t in sys.extra_terms:
        c = sys.to_level_exponent(t.exponent(sys.polytope))
        tp = t.t_power(sys.polytope, sys.u)
        for b, x in enumerate(c):
            if x and tp <= S[b]:
                raise ValueError("correction term reaches the leading order of its equation")


def lift_all(P: MomentPolytope, u, order=None, tol: Tolerances = DEFAULT_TOL, seed: int = 0,
             extra_terms: Sequence[ExtraTerm] = ()) -> list[LiftedCriticalPoint]:
    sys = leading_term_system(P, u, extra_terms=extra_terms)
    return [lift(sys, s, order) for s in solve_full(sys, tol, seed) if s.degeneracy == STRONG]


def critical_value(cp: LiftedCriticalPoint) -> NovikovSeries:
    return cp.critical_value


# mod-T^N criticality

@dataclass(frozen=True)
class ModCheck:
    passed: bool
    valuations: tuple            # per equation; INF when zero to the known precision
    lam: Fraction
    relative: bool
    series: tuple[NovikovSeries, ...] = field(repr=False, default=())


def check_mod(P: MomentPolytope, u, y: Sequence, lam, relative: bool = False,
              extra_terms: Sequence[ExtraTerm] = (), margin=1) -> ModCheck:
    """Whether every ``y_j dPO0/dy_j`` vanishes mod ``T^lam`` at ``y``.

    With ``relative=True`` the equations are the level-normalized ``E_b`` in
    level coordinates, so ``lam`` is measured from each equation's level.
    """
    lam = as_exponent(lam)
    u = tuple(Fraction(x) for x in u)
    ys = [NovikovSeries._lift(v) for v in y]
    for v in ys:
        if v.valuation() != 0:
            raise ValueError("y entries must have valuation 0")
    if relative:
        sys = leading_term_system(P, u, extra_terms=extra_terms)
        ytr = min(v.truncation_order for v in ys)
        ordr = lam + margin if ytr == INF else min(ytr, lam + margin)
        yl = _original_to_level(sys, ys, ordr)
        series = _normalized_residuals(sys, sys.level_po0(), yl, lambda b: ordr)
    else:
        po = build_po0(P, u, extra_terms)
        ordr = lam + margin
        series = [po.log_derivative(j).evaluate(ys, ordr) for j in range(P.dim)]
    vals = []
    passed = True
    for s in series:
        if s.is_zero():
            if s.truncation_order < lam:
                raise TruncationTooShort(
                    f"equation known only mod T^{s.truncation_order}, below {lam}")
            vals.append(INF if s.truncation_order == INF else s.truncation_order)
        else:
            v = s.valuation()
            vals.append(v)
            if v < lam:
                passed = False
            elif s.truncation_order < lam:
                raise TruncationTooShort(f"equation known only mod T^{s.truncation_order}")
    return ModCheck(passed, tuple(vals), lam, relative, tuple(series))


# PO-threshold

EXACT, AT_LEAST_CAP, LOWER_BOUND_ONLY = "exact", "at_least_cap", "lower_bound_only"


@dataclass(frozen=True)
class ThresholdResult:
    value: Fraction
    status: str
    lower: Fraction
    upper: object
    cap: Fraction
    diagnostics: tuple = ()
    witness: tuple = ()     # original coordinates realizing the lower bound

    @property
    def balanced(self) -> bool:
        return self.status == AT_LEAST_CAP

    def label(self) -> str:
        from .novikov import format_rational
        if self.status == AT_LEAST_CAP:
            return f">= {format_rational(self.cap)}"
        if self.status == LOWER_BOUND_ONLY:
            return f">= {format_rational(self.value)} (lower bound only)"
        return format_rational(self.value)


def _raw_min_valuation(P, u, y_orig, cap) -> Fraction:
    chk = check_mod(P, u, y_orig, cap, margin=0)
    return min(min(chk.valuations), cap)


def po_threshold(P: MomentPolytope, u, cap=None, tol: Tolerances = DEFAULT_TOL,
                 seed: int = 0) -> ThresholdResult:
    """Largest ``lam`` (up to ``cap``) with ``dPO0`` solvable mod ``T^lam`` at ``u``."""
    u = tuple(Fraction(x) for x in u)
    if not P.is_interior(u):
        raise NotInterior(f"u = {tuple(str(x) for x in u)} is not in the interior")
    sys = leading_term_system(P, u)
    if cap is None:
        cap = sys.levels.active[-1].S + default_order(sys)
    cap = as_exponent(cap)
    res = solve_full(sys, tol, seed)
    S = _level_of_var(sys)
    S_of = {lv.k: lv.S for lv in sys.levels.levels}
    var_levels = list(sys.basis.level_of)
    incomplete = "completeness_unknown" in res.flags
    diags = []
    best = (Fraction(-1), ())
    upper_all: object = Fraction(-1)
    reached_cap = False
    for br in res.branches:
        kinds = [r.kind for r in br.roots]
        family = any(r.family for r in br.roots)
        values = [Fraction(1)] * sys.n
        for k, r in zip(br.levels, br.roots):
            idx = sys.basis.indices_of_level(k)
            for b, v in zip(idx, r.values):
                values[b] = v
        # strong prefix: levels solved before the first non-strong one
        strong_levels = []
        for k, kd in zip(br.levels, kinds):
            if kd != STRONG:
                break
            strong_levels.append(k)
        active = [b for b in range(sys.n) if var_levels[b] in strong_levels]
        targets = [max(cap - S[b], Fraction(0)) for b in range(sys.n)]
        ys, _ = lift_values(sys, values, targets, active)
        y_orig = _level_to_original(sys, ys, cap)
        lower = _raw_min_valuation(P, u, y_orig, cap)
        if br.failed_level is None:
            upper = INF
            if len(strong_levels) == len(br.levels) and lower >= cap:
                reached_cap = True
        else:
            upper = INF if family else S_of[br.failed_level]
        if incomplete:
            upper = INF
        diags.append({"levels": list(br.levels), "kinds": kinds, "failed_level": br.failed_level,
                      "lower": lower, "upper": upper})
        if lower > best[0]:
            best = (lower, tuple(y_orig))
        upper_all = upper if upper_all == INF or upper == INF else max(upper_all, upper)
        if upper == INF:
            upper_all = INF
    lower = best[0]
    if reached_cap:
        return ThresholdResult(cap, AT_LEAST_CAP, cap, INF, cap, tuple(diags), best[1])
    if upper_all != INF and lower >= upper_all:
        return ThresholdResult(lower, EXACT, lower, upper_all, cap, tuple(diags), best[1])
    return ThresholdResult(lower, LOWER_BOUND_ONLY, lower, upper_all, cap, tuple(diags), best[1])

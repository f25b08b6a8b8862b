"""Floer cohomology of torus fibers of toric surfaces and displacement bounds.

For ``n = 2`` the boundary operator on ``H(T^2)`` is
``m1(e_i) = g_i e_0`` and ``m1(e_12) = g_1 e_2 - g_2 e_1`` with
``g_i = y_i dPO0/dy_i``. Over the valuation ring both parities are
``Lambda_0 / T^v`` with ``v = min(val g_1, val g_2)``, unless both ``g_i``
vanish, in which case the cohomology is free of rank 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DimensionUnsupported, TruncationTooShort
from .lift import AT_LEAST_CAP, EXACT, ThresholdResult, po_threshold
from .novikov import INF, NovikovSeries, as_exponent, format_rational
from .polytope import MomentPolytope
from .potential import build_po0

BASIS = ("e_0", "e_1", "e_2", "e_12")


@dataclass(frozen=True)
class HFReport:
    free_rank: int
    torsion_exponents: tuple[Fraction, ...]     # one entry per parity when torsion
    parity: dict                                # "even"/"odd" -> description
    valuations: tuple                           # val g_1, val g_2 (INF beyond cap)
    cap: Fraction
    basis: tuple[str, ...] = BASIS

    def describe(self) -> str:
        if self.free_rank:
            return f"Lambda_0^{self.free_rank} (to cap {format_rational(self.cap)})"
        v = format_rational(self.torsion_exponents[0])
        return f"Lambda_0/(T^({v})) in each parity"


def hf_t2(P: MomentPolytope, u, y: Sequence, cap) -> HFReport:
    if P.dim != 2:
        raise DimensionUnsupported("the explicit boundary operator is implemented for n = 2")
    cap = as_exponent(cap)
    u = tuple(Fraction(x) for x in u)
    ys = [NovikovSeries._lift(v) for v in y]
    po = build_po0(P, u)
    vals = []
    for j in range(2):
        g = po.log_derivative(j).evaluate(ys, cap)
        if g.is_zero():
            if g.truncation_order < cap:
                raise TruncationTooShort(f"g_{j + 1} known only mod T^{g.truncation_order}")
            vals.append(INF)
        else:
            vals.append(g.valuation())
    v = min(vals)
    if v == INF:
        return HFReport(4, (), {"even": "Lambda_0^2", "odd": "Lambda_0^2"}, tuple(vals), cap)
    tors = f"Lambda_0/(T^({format_rational(v)}))"
    return HFReport(0, (v, v), {"even": tors, "odd": tors}, tuple(vals), cap)


@dataclass(frozen=True)
class DisplacementReport:
    threshold: ThresholdResult
    energy_bound: float                # 2*pi*E(u)
    energy_text: str
    balanced: bool
    min_intersections: int | None      # under the energy bound (or always, if balanced)

    def describe(self) -> str:
        s = f"e(L(u)) >= {self.energy_text}"
        if self.threshold.status == AT_LEAST_CAP:
            s += " (threshold verified only to the cap)"
        elif self.threshold.status != EXACT:
            s += " (lower bound only)"
        if self.min_intersections is not None:
            cond = "" if self.balanced else f" when ||psi|| < {self.energy_text}"
            s += f"; #(psi(L) cap L) >= {self.min_intersections}{cond}"
        return s


def displacement_report(P: MomentPolytope, u, cap=None, seed: int = 0) -> DisplacementReport:
    th = po_threshold(P, u, cap, seed=seed)
    E = th.value
    text = f"2*pi*{format_rational(E)}"
    balanced = th.status == AT_LEAST_CAP
    points = None
    if balanced:
        points = 2 ** P.dim
    elif P.dim == 2 and th.witness and th.status == EXACT:
        rep = hf_t2(P, u, th.witness, th.value + 1)
        points = rep.free_rank + 2 * len(rep.torsion_exponents)
    return DisplacementReport(th, 2 * math.pi * float(E), text, balanced, points)

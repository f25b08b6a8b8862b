"""Batyrev relations of quantum cohomology and their images in the Jacobian ring.

Under ``psi_u : z_i -> zbar_i(u) = y^{v_i} T^{l_i(u)}`` every quantum
Stanley-Reisner relation becomes an identity of monomials and each linear
relation ``sum_i v_{i,j} z_i`` becomes ``y_j dPO0/dy_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import RelationFailed, SingularNormalMatrix
from .novikov import NovikovSeries, format_rational
from .polytope import MomentPolytope, PrimitiveCollection, betti_sum, primitive_collections
from .potential import LaurentPolyNov, build_po0, zbar


def _relation_text(lhs, rhs, t) -> str:
    def mono(e):
        return "*".join(f"z{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
    r = mono(rhs)
    right = f"T^({format_rational(t)})" if t else ""
    right = "*".join(x for x in (right, r) if x) or "1"
    return f"{mono(lhs) or '1'} = {right}"


@dataclass(frozen=True)
class QSRRelation:
    """``prod_{i in lhs} z_i = T^omega prod_j z_j^{k_j}``."""

    collection: PrimitiveCollection
    lhs: tuple[int, ...]                     # z exponents, length m
    rhs: tuple[int, ...]
    omega: Fraction

    def to_text(self) -> str:
        return _relation_text(self.lhs, self.rhs, self.omega)


@dataclass(frozen=True)
class LinearRelation:
    j: int
    coefficients: tuple[int, ...]           # v_{i,j}, i = 1..m

    def to_text(self) -> str:
        out = ""
        for i, c in enumerate(self.coefficients):
            if not c:
                continue
            term = f"z{i + 1}" if abs(c) == 1 else f"{abs(c)}*z{i + 1}"
            if not out:
                out = ("-" if c < 0 else "") + term
            else:
                out += (" - " if c < 0 else " + ") + term
        return out or "0"


def build_relations(P: MomentPolytope) -> tuple[list[QSRRelation], list[LinearRelation]]:
    m = P.m
    qsr = []
    for pc in primitive_collections(P):
        lhs = [0] * m
        for i in pc.indices:
            lhs[i] = 1
        rhs = [0] * m
        for j, k in pc.dual:
            rhs[j] = k
        qsr.append(QSRRelation(pc, tuple(lhs), tuple(rhs), pc.omega))
    lin = [LinearRelation(j, tuple(P.facets[i].normal[j] for i in range(m))) for j in range(P.dim)]
    return qsr, lin


def _image(P: MomentPolytope, u, exps: Sequence[int], t_shift=Fraction(0)) -> LaurentPolyNov:
    """``T^t_shift * prod_i zbar_i(u)^{exps[i]}`` as a monomial."""
    v = [0] * P.dim
    t = Fraction(t_shift)
    for i, k in enumerate(exps):
        if k:
            for j in range(P.dim):
                v[j] += k * P.facets[i].normal[j]
            t += k * P.ell(i, u)
    names = [f"y{j + 1}" for j in range(P.dim)]
    return LaurentPolyNov(names, {tuple(v): NovikovSeries.monomial(1, t)})


@dataclass(frozen=True)
class PsiReport:
    u: tuple[Fraction, ...]
    qsr: tuple[tuple[str, bool], ...]
    linear: tuple[tuple[str, bool], ...]
    kernel: tuple[tuple[str, bool], ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.qsr + self.linear + self.kernel)


def kernel_relations(P: MomentPolytope) -> list[tuple[tuple[int, ...], tuple[int, ...], Fraction]]:
    """``r(A)`` for a Z-basis of ``{A : sum A_i v_i = 0}``:
    ``prod_{A_i>0} z_i^{A_i} = T^{-sum A_i lambda_i} prod_{A_i<0} z_i^{-A_i}``."""
    M = [[P.facets[i].normal[j] for i in range(P.m)] for j in range(P.dim)]
    out = []
    for A in linalg.integer_kernel(M, P.m):
        pos = tuple(max(a, 0) for a in A)
        neg = tuple(max(-a, 0) for a in A)
        t = -sum((a * P.facets[i].offset for i, a in enumerate(A)), Fraction(0))
        out.append((pos, neg, t))
    return out


def verify_psi(P: MomentPolytope, u, relations: tuple | None = None, check_kernel: bool = True) -> PsiReport:
    """Check every relation under ``psi_u`` exactly; raise ``RelationFailed`` on the first failure.

    ``relations`` defaults to :func:`build_relations` of ``P``; passing the
    relations of another polytope is how corrupted data is detected.
    """
    u = tuple(Fraction(x) for x in u)
    qsr, lin = relations if relations is not None else build_relations(P)
    po = build_po0(P, u)
    q_out, l_out, k_out = [], [], []
    for r in qsr:
        a = _image(P, u, r.lhs)
        b = _image(P, u, r.rhs, r.omega)
        if (a - b).is_zero():
            q_out.append((r.to_text(), True))
        else:
            raise RelationFailed(f"quantum Stanley-Reisner relation {r.to_text()} fails at u",
                                 witness=(a.to_text(), b.to_text()))
    for r in lin:
        img = LaurentPolyNov(po.names, {})
        for i, c in enumerate(r.coefficients):
            if c:
                z = zbar(P, u, i)
                img = img + LaurentPolyNov(po.names, {e: s.scale(c) for e, s in z.terms.items()})
        target = po.log_derivative(r.j)
        if (img - target).is_zero():
            l_out.append((r.to_text(), True))
        else:
            raise RelationFailed(f"linear relation {r.to_text()} differs from y{r.j + 1} dPO0/dy{r.j + 1}",
                                 witness=(img.to_text(), target.to_text()))
    if check_kernel and relations is None:
        for pos, neg, t in kernel_relations(P):
            a = _image(P, u, pos)
            b = _image(P, u, neg, t)
            text = _relation_text(pos, neg, t)
            if not (a - b).is_zero():
                raise RelationFailed(f"kernel relation {text} fails", witness=(a.to_text(), b.to_text()))
            k_out.append((text, True))
    return PsiReport(u, tuple(q_out), tuple(l_out), tuple(k_out))


def valuation_to_position(P: MomentPolytope, w: Sequence) -> tuple[Fraction, ...]:
    """The point ``u`` with ``l_i(u) = val(w_i)`` for the first ``n`` facets."""
    n = P.dim
    A = [list(P.facets[i].normal) for i in range(n)]
    if linalg.det(A) == 0:
        raise SingularNormalMatrix("the first n facet normals are linearly dependent")
    vals = []
    for x in w[:n]:
        v = x.valuation() if isinstance(x, NovikovSeries) else Fraction(x)
        vals.append(Fraction(v))
    rhs = [vals[i] + P.facets[i].offset for i in range(n)]
    sol = linalg.solve(A, rhs)
    return tuple(Fraction(x) for x in sol)


@dataclass(frozen=True)
class BettiComparison:
    count: int | None
    betti: int
    breakdown: tuple          # ((u, position, count), ...)
    excluded: tuple           # candidates outside the interior

    @property
    def passed(self) -> bool:
        return self.count == self.betti


def count_vs_betti(P: MomentPolytope, points: Sequence | None = None, seed: int = 0) -> BettiComparison:
    from .lte import count_balanced
    bc = count_balanced(P, points, seed=seed)
    rows = tuple((c.u, c.position, c.count) for c in bc.interior)
    ext = tuple((c.u, c.position, c.count) for c in bc.exterior)
    return BettiComparison(bc.total, betti_sum(P), rows, ext)

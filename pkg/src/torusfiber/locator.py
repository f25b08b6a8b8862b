"""Max-min location of the distinguished fiber and the level filtration.

The variational algorithm maximizes ``s_1(u) = min_i l_i(u)`` over ``P``,
then, on the argmax face, the minimum of the facet functions that are not
yet constant there, and so on until the face is a single point ``u0``.
Every step is an exact linear program, solved by enumerating the vertices of
the lifted polytope in ``(u, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import NotInterior
from .polytope import MomentPolytope, Point


@dataclass(frozen=True)
class FiltrationStep:
    k: int
    S: Fraction
    face_vertices: tuple[Point, ...]
    bounds: tuple[Fraction, ...]     # P_k = {u : l_i(u) >= bounds[i]}
    face_dim: int
    I: frozenset[int]
    d: int

    @property
    def is_point(self) -> bool:
        return len(self.face_vertices) == 1


@dataclass(frozen=True)
class Filtration:
    polytope: MomentPolytope
    steps: tuple[FiltrationStep, ...]
    u0: Point

    @property
    def K(self) -> int:
        return len(self.steps)


def _affine_dim(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    return linalg.rank([[x - y for x, y in zip(p, points[0])] for p in points[1:]])


def _face(P: MomentPolytope, bounds: Sequence[Fraction]) -> list[Point]:
    A = [list(f.normal) for f in P.facets]
    b = [f.offset + bd for f, bd in zip(P.facets, bounds)]
    return [v for v, _ in linalg.enumerate_vertices(A, b)]


def run_filtration(P: MomentPolytope) -> Filtration:
    """Run the max-min iteration to the distinguished point ``u0``."""
    n, m = P.dim, P.m
    constant: set[int] = set()
    bounds = [Fraction(0)] * m
    S_prev = Fraction(0)
    steps: list[FiltrationStep] = []
    span_rows: list[list[int]] = []
    while True:
        # lifted LP in (u, t): l_i(u) >= bounds_i (constant facets),
        # l_i(u) >= t (the others), t >= S_prev.
        A, b = [], []
        for i, f in enumerate(P.facets):
            if i in constant:
                A.append(list(f.normal) + [0])
                b.append(f.offset + bounds[i])
            else:
                A.append(list(f.normal) + [-1])
                b.append(f.offset)
        A.append([0] * n + [1])
        b.append(S_prev)
        verts = linalg.enumerate_vertices(A, b)
        S = max(v[-1] for v, _ in verts)
        new_bounds = [bounds[i] if i in constant else S for i in range(m)]
        face = _face(P, new_bounds)
        I = frozenset(i for i in range(m) if i not in constant
                      and all(P.ell(i, p) == S for p in face))
        before = linalg.rank(span_rows) if span_rows else 0
        span_rows += [list(P.facets[i].normal) for i in sorted(I)]
        d = linalg.rank(span_rows) - before
        steps.append(FiltrationStep(
            k=len(steps) + 1, S=S, face_vertices=tuple(face),
            bounds=tuple(new_bounds), face_dim=_affine_dim(face), I=I, d=d))
        constant |= I
        bounds = new_bounds
        S_prev = S
        if len(face) == 1:
            return Filtration(P, tuple(steps), face[0])
        if len(steps) > m:
            raise RuntimeError("max-min iteration failed to terminate")


# level structure at an arbitrary point

@dataclass(frozen=True)
class Level:
    k: int
    S: Fraction
    facets: tuple[int, ...]
    d: int
    rank: int   # rank of the span of normals of levels <= k


@dataclass(frozen=True)
class LevelStructure:
    polytope: MomentPolytope
    u: Point
    levels: tuple[Level, ...]
    K: int

    @property
    def active(self) -> tuple[Level, ...]:
        """Levels ``1..K``; the ones that contribute leading equations."""
        return self.levels[: self.K]

    def level_of_facet(self, i: int) -> int:
        for lv in self.levels:
            if i in lv.facets:
                return lv.k
        raise KeyError(i)


def level_structure_at(P: MomentPolytope, u: Sequence, allow_exterior: bool = False) -> LevelStructure:
    """Group facets by the value of ``l_i(u)``, in increasing order.

    All levels are kept, including those after the span of normals reaches
    full rank at level ``K``.
    """
    u = tuple(Fraction(x) for x in u)
    if len(u) != P.dim:
        raise NotInterior(f"point has {len(u)} coordinates, polytope dimension is {P.dim}")
    vals = P.ells(u)
    if not allow_exterior and not all(x > 0 for x in vals):
        raise NotInterior(f"u = {tuple(str(x) for x in u)} is not in the interior")
    groups: dict[Fraction, list[int]] = {}
    for i, x in enumerate(vals):
        groups.setdefault(x, []).append(i)
    levels = []
    rows: list[list[int]] = []
    prev = 0
    K = None
    for k, S in enumerate(sorted(groups), start=1):
        rows += [list(P.facets[i].normal) for i in groups[S]]
        r = linalg.rank(rows)
        levels.append(Level(k, S, tuple(groups[S]), r - prev, r))
        if K is None and r == P.dim:
            K = k
        prev = r
    assert K is not None, "normals of a compact polytope span"
    return LevelStructure(P, u, tuple(levels), K)


# adapted lattice bases

@dataclass(frozen=True)
class LevelBasis:
    """Z-basis ``e*_b`` of the lattice adapted to the level filtration.

    ``vectors[b]`` is the basis vector, ``level_of[b]`` its level ``k`` and
    ``coords[i]`` the integer coordinates of the normal ``v_i`` in this basis,
    so the monomial ``y^{v_i}`` becomes ``prod_b y_b^{coords[i][b]}``.
    """

    vectors: tuple[tuple[int, ...], ...]
    level_of: tuple[int, ...]
    coords: tuple[tuple[int, ...], ...]
    inverse: tuple[tuple[int, ...], ...]   # rows: e_i = sum_b inverse[i][b] e*_b

    @property
    def n(self) -> int:
        return len(self.vectors)

    def indices_of_level(self, k: int) -> tuple[int, ...]:
        return tuple(b for b, lv in enumerate(self.level_of) if lv == k)

    def names(self) -> list[str]:
        out = []
        counter: dict[int, int] = {}
        for lv in self.level_of:
            counter[lv] = counter.get(lv, 0) + 1
            out.append(f"y[{lv},{counter[lv]}]")
        return out

    def substitution(self) -> list[str]:
        """Each level variable as a monomial in the original ``y_i``."""
        out = []
        for vec in self.vectors:
            parts = []
            for i, e in enumerate(vec):
                if e == 1:
                    parts.append(f"y{i + 1}")
                elif e != 0:
                    parts.append(f"y{i + 1}^{e}")
            out.append("*".join(parts) or "1")
        return out

    def is_identity(self) -> bool:
        n = self.n
        return all(self.vectors[b][i] == int(b == i) for b in range(n) for i in range(n))


def _reduce(w: list[int], prev: list[list[int]]) -> list[int]:
    """Shorten ``w`` by adding integer multiples of earlier vectors (L1 norm)."""
    improved = True
    while improved:
        improved = False
        for p in prev:
            for s in (1, -1):
                cand = [a + s * b for a, b in zip(w, p)]
                if sum(map(abs, cand)) < sum(map(abs, w)):
                    w, improved = cand, True
    for x in w:
        if x != 0:
            if x < 0:
                w = [-a for a in w]
            break
    return w


def integer_basis(levels: LevelStructure) -> LevelBasis:
    """Adapted Z-basis: each prefix spans the saturated lattice of its levels."""
    P = levels.polytope
    n = P.dim
    B: list[list[int]] = []
    level_of: list[int] = []
    span: list[list[int]] = []
    units = [[int(i == j) for j in range(n)] for i in range(n)]
    for lv in levels.levels:
        if lv.d == 0:
            continue
        span += [list(P.facets[i].normal) for i in lv.facets]
        target = linalg.saturate(span, n)
        need = lv.rank
        candidates = [e for e in units if linalg.row_space_contains(target, e)]
        candidates += [list(P.facets[i].normal) for i in lv.facets]
        for c in candidates:
            if len(B) == need:
                break
            if linalg.row_space_contains(B, c) if B else False:
                continue
            c = _reduce(list(c), [B[j] for j in range(len(B)) if level_of[j] == lv.k])
            if linalg.is_primitive_system(B + [c]):
                B.append(c)
                level_of.append(lv.k)
        if len(B) < need:
            for w in linalg.complete_basis(B, target):
                B.append(w)
                level_of.append(lv.k)
        assert len(B) == need
        if need == n:
            break
    Binv = linalg.inverse(B)
    assert Binv is not None
    coords = []
    for f in P.facets:
        # v = c B  =>  c = v B^-1
        c = [sum(Fraction(f.normal[i]) * Binv[i][b] for i in range(n)) for b in range(n)]
        assert all(x.denominator == 1 for x in c), "normals must be integral in the level basis"
        coords.append(tuple(int(x) for x in c))
    basis = LevelBasis(tuple(map(tuple, B)), tuple(level_of), tuple(coords),
                       tuple(tuple(int(Binv[i][b]) for b in range(n)) for i in range(n)))
    _check_triangular(levels, basis)
    return basis


def _check_triangular(levels: LevelStructure, basis: LevelBasis) -> None:
    for lv in levels.levels:
        for i in lv.facets:
            for b, kb in enumerate(basis.level_of):
                if kb > lv.k:
                    assert basis.coords[i][b] == 0, "normal leaks into a later level"


@dataclass(frozen=True)
class ConeCertificate:
    k: int
    target: tuple[int, ...]          # +- a level-k basis vector, in level coordinates
    weights: tuple[Fraction, ...]    # nonnegative, one per facet of level k


def positivity_certificates(levels: LevelStructure, basis: LevelBasis) -> list[ConeCertificate]:
    """For each level ``k`` and each level-k basis direction ``+-e``, nonnegative
    weights on the level-k normals whose sum equals ``+-e`` modulo the span of
    earlier levels. Raises ``ValueError`` when some direction has none, which
    happens away from the balanced point.
    """
    out = []
    for lv in levels.active:
        idx = basis.indices_of_level(lv.k)
        if not idx:
            continue
        gens = [[basis.coords[i][b] for b in idx] for i in lv.facets]
        for j in range(len(idx)):
            for s in (1, -1):
                t = [s * int(jj == j) for jj in range(len(idx))]
                w = linalg.in_cone(t, gens)
                if w is None:
                    raise ValueError(f"level {lv.k}: direction {t} is not a nonnegative combination")
                out.append(ConeCertificate(lv.k, tuple(t), tuple(w)))
    return out

"""Rational moment polytopes in facet presentation.

``P = {u : l_i(u) >= 0}`` with ``l_i(u) = <u, v_i> - lambda_i``. Facet
indices are 0-based and follow input order.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
import operator
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

from . import linalg
from .errors import Malformed, NotFullDim, NotSmooth, Unbounded

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

Point = tuple[Fraction, ...]


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: Fraction

    def ell(self, u: Sequence) -> Fraction:
        return sum((a * Fraction(x) for a, x in zip(self.normal, u)), Fraction(0)) - self.offset


@dataclass(frozen=True)
class PrimitiveCollection:
    """Minimal non-face ``indices`` with ``sum v_i = sum k_j v_j`` over ``dual``."""

    indices: tuple[int, ...]
    dual: tuple[tuple[int, int], ...]   # (facet index, positive weight k)
    omega: Fraction


@dataclass(frozen=True)
class MomentPolytope:
    name: str
    dim: int
    facets: tuple[Facet, ...]
    vertices: tuple[Point, ...]
    vertex_facets: tuple[frozenset[int], ...]
    params: tuple[tuple[str, Fraction], ...] = field(default=())

    @property
    def normals(self) -> list[tuple[int, ...]]:
        return [f.normal for f in self.facets]

    @property
    def offsets(self) -> list[Fraction]:
        return [f.offset for f in self.facets]

    @property
    def m(self) -> int:
        return len(self.facets)

    def ell(self, i: int, u: Sequence) -> Fraction:
        return self.facets[i].ell(u)

    def ells(self, u: Sequence) -> list[Fraction]:
        return [f.ell(u) for f in self.facets]

    def contains(self, u: Sequence) -> bool:
        return all(x >= 0 for x in self.ells(u))

    def is_interior(self, u: Sequence) -> bool:
        return all(x > 0 for x in self.ells(u))

    def position(self, u: Sequence) -> str:
        vals = self.ells(u)
        if all(x > 0 for x in vals):
            return "interior"
        if all(x >= 0 for x in vals):
            return "boundary"
        return "exterior"

    def digest(self) -> str:
        data = [[list(f.normal), str(f.offset)] for f in self.facets]
        return hashlib.sha256(json.dumps(data).encode()).hexdigest()[:16]

    def with_offsets(self, offsets: Sequence) -> "MomentPolytope":
        return from_facets([f.normal for f in self.facets], offsets, name=self.name + "'",
                           validate_smooth=False)

    def translate(self, shift: Sequence) -> "MomentPolytope":
        """The polytope ``P + shift``."""
        offs = [f.offset + sum(a * Fraction(s) for a, s in zip(f.normal, shift)) for f in self.facets]
        return from_facets(self.normals, offs, name=self.name)


def ell(P: MomentPolytope, i: int, u: Sequence) -> Fraction:
    return P.ell(i, u)


def from_facets(normals: Sequence[Sequence[int]], offsets: Sequence, name: str = "P",
                params: Mapping | None = None, validate_smooth: bool = True) -> MomentPolytope:
    """Validate facet data and derive the vertices."""
    if not normals:
        raise Malformed("no facets")
    n = len(normals[0])
    if n < 1:
        raise Malformed("dimension must be positive")
    facets = []
    for v, lam in zip(normals, offsets):
        if len(v) != n:
            raise Malformed(f"normal {list(v)} has wrong length")
        if any(int(x) != x for x in v):
            raise Malformed(f"normal {list(v)} is not integral")
        v = tuple(int(x) for x in v)
        if not any(v):
            raise Malformed("zero normal")
        facets.append(Facet(v, Fraction(lam)))
    if len(set(f.normal for f in facets)) != len(facets):
        raise Malformed("repeated facet normal")

    A = [list(f.normal) for f in facets]
    b = [f.offset for f in facets]
    for sign in (1, -1):
        for j in range(n):
            e = [Fraction(sign * int(i == j)) for i in range(n)]
            if linalg.in_cone(e, A) is None:
                raise Unbounded("normals do not positively span the dual space")
    verts = linalg.enumerate_vertices(A, b)
    if not verts:
        raise NotFullDim("polytope is empty")
    points = [v for v, _ in verts]
    diffs = [[x - y for x, y in zip(p, points[0])] for p in points[1:]]
    if linalg.rank(diffs) < n if diffs else True:
        raise NotFullDim("polytope is not full-dimensional")
    for i in range(len(facets)):
        on = [p for p, act in verts if i in act]
        d = [[x - y for x, y in zip(p, on[0])] for p in on[1:]] if on else []
        if not on or (linalg.rank(d) if d else 0) < n - 1:
            raise Malformed(f"facet {i + 1} does not support a codimension-one face")
    P = MomentPolytope(
        name=name, dim=n, facets=tuple(facets),
        vertices=tuple(points), vertex_facets=tuple(act for _, act in verts),
        params=tuple(sorted((k, Fraction(x)) for k, x in (params or {}).items())),
    )
    if validate_smooth:
        check_smooth(P)
    return P


def check_smooth(P: MomentPolytope) -> None:
    for f in P.facets:
        g = 0
        for x in f.normal:
            g = math.gcd(g, x)
        if g != 1:
            raise NotSmooth(f"normal {list(f.normal)} is not primitive")
    for vert, act in zip(P.vertices, P.vertex_facets):
        if len(act) != P.dim:
            raise NotSmooth(f"vertex {_fmt_point(vert)} lies on {len(act)} facets", vertex=vert)
        d = linalg.det([list(P.facets[i].normal) for i in sorted(act)])
        if abs(d) != 1:
            raise NotSmooth(f"vertex {_fmt_point(vert)}: normal determinant {d}", vertex=vert)


def _fmt_point(p) -> str:
    return "(" + ", ".join(str(Fraction(x)) for x in p) + ")"


def vertex_count(P: MomentPolytope) -> int:
    return len(P.vertices)


def betti_sum(P: MomentPolytope) -> int:
    """Total Betti number; equals the number of vertices for a smooth polytope."""
    check_smooth(P)
    return len(P.vertices)


def is_face(P: MomentPolytope, subset) -> bool:
    s = set(subset)
    return any(s <= act for act in P.vertex_facets)


def primitive_collections(P: MomentPolytope) -> list[PrimitiveCollection]:
    check_smooth(P)
    m, n = P.m, P.dim
    out = []
    for size in range(2, m + 1):
        for sub in combinations(range(m), size):
            if is_face(P, sub):
                continue
            if not all(is_face(P, sub[:i] + sub[i + 1:]) for i in range(size)):
                continue
            w = [sum(P.facets[i].normal[j] for i in sub) for j in range(n)]
            dual = _cone_decomposition(P, w)
            omega = -sum((P.facets[i].offset for i in sub), Fraction(0)) + sum(
                (k * P.facets[j].offset for j, k in dual), Fraction(0))
            out.append(PrimitiveCollection(tuple(sub), dual, omega))
    return out


def _cone_decomposition(P: MomentPolytope, w: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Write ``w`` as a nonnegative integer combination inside the smallest cone."""
    if not any(w):
        return ()
    best = None
    for act in P.vertex_facets:
        idx = sorted(act)
        M = [[P.facets[i].normal[j] for i in idx] for j in range(P.dim)]
        k = linalg.solve(M, [Fraction(x) for x in w])
        if k is None or any(x < 0 for x in k):
            continue
        terms = tuple((i, int(x)) for i, x in zip(idx, k) if x != 0)
        if best is None or len(terms) < len(best):
            best = terms
    if best is None:
        raise NotSmooth("fan is not complete")
    return best


# parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}


def eval_rational(expr, params: Mapping[str, Fraction]) -> Fraction:
    """Evaluate an arithmetic expression like ``"-(1-alpha)"`` exactly."""
    if isinstance(expr, (int, Fraction)):
        return Fraction(expr)
    if isinstance(expr, float):
        raise Malformed(f"floating-point value {expr!r}; write it as p/q")
    if not isinstance(expr, str):
        raise Malformed(f"cannot read {expr!r} as a rational")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise Malformed(f"unknown parameter {node.id!r}")
            return Fraction(params[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            x = ev(node.operand)
            return -x if isinstance(node.op, ast.USub) else x
        raise Malformed(f"unsupported expression {expr!r}")

    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError:
        raise Malformed(f"cannot parse {expr!r}") from None
    try:
        return ev(tree)
    except ZeroDivisionError:
        raise Malformed(f"division by zero in {expr!r}") from None


def parse_polytope(source, params: Mapping | None = None) -> MomentPolytope:
    """Build a polytope from TOML text (or an already-parsed mapping).

    Expected fields: ``name``, ``dim``, ``facets = [{v = [...], lambda = "p/q"}]``
    and an optional ``[params]`` table of defaults that ``params`` overrides.
    """
    if isinstance(source, (str, bytes)):
        try:
            data = tomllib.loads(source.decode() if isinstance(source, bytes) else source)
        except tomllib.TOMLDecodeError as exc:
            raise Malformed(f"invalid TOML: {exc}") from None
    elif isinstance(source, Mapping):
        data = dict(source)
    else:
        raise Malformed("unsupported source type")
    if "facets" not in data:
        raise Malformed("missing 'facets'")
    values: dict[str, Fraction] = {}
    for k, v in (data.get("params") or {}).items():
        values[k] = eval_rational(v, {})
    for k, v in (params or {}).items():
        values[k] = v if isinstance(v, Fraction) else eval_rational(v, {})
    normals, offsets = [], []
    for f in data["facets"]:
        if not isinstance(f, Mapping) or "v" not in f or "lambda" not in f:
            raise Malformed(f"facet entry {f!r} needs 'v' and 'lambda'")
        v = [eval_rational(x, values) for x in f["v"]]
        if any(x.denominator != 1 for x in v):
            raise Malformed(f"normal {f['v']} is not integral")
        normals.append([int(x) for x in v])
        offsets.append(eval_rational(f["lambda"], values))
    P = from_facets(normals, offsets, name=str(data.get("name", "P")), params=values)
    if "dim" in data and int(data["dim"]) != P.dim:
        raise Malformed(f"dim {data['dim']} does not match normals of length {P.dim}")
    return P


FIXTURE_DIR = Path(__file__).with_name("fixtures")


def fixture_path(name: str) -> Path:
    p = FIXTURE_DIR / name
    if p.suffix != ".toml":
        p = p.with_suffix(".toml")
    return p


def load_polytope(path, params: Mapping | None = None) -> MomentPolytope:
    """Read a polytope file; bare names fall back to the bundled fixtures."""
    p = Path(path)
    if not p.exists():
        alt = fixture_path(p.name)
        if alt.exists():
            p = alt
        else:
            raise Malformed(f"no such polytope file: {path}")
    return parse_polytope(p.read_text(), params)


def list_fixtures() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.toml"))

from fractions import Fraction as F

import pytest

from torusfiber.errors import Malformed, NotSmooth, Unbounded
from torusfiber.polytope import (betti_sum, from_facets, list_fixtures, parse_polytope,
                                 primitive_collections, vertex_count)

from conftest import poly, pt


def test_cp2_vertices(cp2):
    assert sorted(cp2.vertices) == sorted([pt(0, 0), pt(1, 0), pt(0, 1)])


def test_rectangle_vertices(rect):
    assert len(rect.vertices) == 4 and pt(1, 2) in rect.vertices


def test_scaled_normal_rejected():
    with pytest.raises(NotSmooth):
        from_facets([(2, 0), (0, 1), (-1, -1)], [0, 0, -1])
    with pytest.raises(NotSmooth):
        poly("bad")


def test_unbounded_and_malformed():
    with pytest.raises(Unbounded):
        from_facets([(1, 0), (0, 1)], [0, 0])
    with pytest.raises(Malformed):
        parse_polytope("dim = 2")
    with pytest.raises(Malformed):
        parse_polytope("facets = [ { v = [1, 0] } ]")


def test_ell(cp2, rect):
    assert cp2.ell(2, pt(F(1, 3), F(1, 3))) == F(1, 3)
    for v, act in zip(cp2.vertices, cp2.vertex_facets):
        for i in act:
            assert cp2.ell(i, v) == 0
    assert rect.ell(3, pt(0, 0)) == 2


def test_primitive_collections_cp2(cp2):
    (pc,) = primitive_collections(cp2)
    assert pc.indices == (0, 1, 2) and pc.dual == () and pc.omega == 1


def test_primitive_collections_rectangle():
    P = poly("rectangle", a=2, b=3)
    pcs = {pc.indices: pc.omega for pc in primitive_collections(P)}
    assert pcs == {(0, 2): 2, (1, 3): 3}


def test_primitive_collections_blowup():
    P = poly("blowup1", alpha=F(1, 3))
    pcs = {pc.indices: (pc.dual, pc.omega) for pc in primitive_collections(P)}
    assert pcs == {(0, 2): (((3, 1),), F(1, 3)), (1, 3): ((), F(2, 3))}


def test_betti_sums():
    assert vertex_count(poly("cp2")) == betti_sum(poly("cp2")) == 3
    assert betti_sum(poly("blowup2", alpha=F(1, 2))) == 5
    assert betti_sum(poly("rectangle", a=1, b=1)) == 4
    assert betti_sum(poly("cp3_blowup_line")) == 6


def test_param_override():
    P = poly("blowup1", alpha=F(1, 4))
    assert P.facets[3].offset == F(-3, 4)
    assert dict(P.params) == {"alpha": F(1, 4)}


def test_all_fixtures_load():
    for name in list_fixtures():
        if name == "bad":
            continue
        P = poly(name)
        assert P.m >= P.dim + 1


def test_position(cp2):
    assert cp2.position(pt(F(1, 3), F(1, 3))) == "interior"
    assert cp2.position(pt(0, F(1, 2))) == "boundary"
    assert cp2.position(pt(-1, 0)) == "exterior"

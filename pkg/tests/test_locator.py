from fractions import Fraction as F

import pytest

from torusfiber.errors import NotInterior
from torusfiber.locator import integer_basis, level_structure_at, positivity_certificates, run_filtration

from conftest import poly, pt


def test_rectangle_filtration(rect):
    f = run_filtration(rect)
    assert [s.S for s in f.steps] == [F(1, 2), 1]
    assert sorted(f.steps[0].face_vertices) == [pt(F(1, 2), F(1, 2)), pt(F(1, 2), F(3, 2))]
    assert f.u0 == pt(F(1, 2), 1)


def test_cp2_filtration(cp2):
    f = run_filtration(cp2)
    assert f.u0 == pt(F(1, 3), F(1, 3)) and f.K == 1 and f.steps[0].S == F(1, 3)


def test_blowup_filtration():
    f = run_filtration(poly("blowup1", alpha=F(1, 2)))
    assert f.steps[0].S == F(1, 4)
    assert sorted(f.steps[0].face_vertices) == [pt(F(1, 4), F(1, 4)), pt(F(1, 2), F(1, 4))]
    assert f.steps[1].S == F(3, 8) and f.u0 == pt(F(3, 8), F(1, 4))


@pytest.mark.parametrize("name", ["cp2", "cp3", "rectangle", "blowup1", "blowup2", "hirzebruch"])
def test_u0_interior(name):
    P = poly(name)
    assert P.is_interior(run_filtration(P).u0)


def test_levels_rectangle(rect):
    ls = level_structure_at(rect, pt(F(1, 2), F(3, 4)))
    got = [(lv.S, lv.facets) for lv in ls.levels]
    assert got == [(F(1, 2), (0, 2)), (F(3, 4), (1,)), (F(5, 4), (3,))]
    assert ls.K == 2


def test_levels_blowup2():
    P = poly("blowup2", alpha=F(1, 2))
    ls = level_structure_at(P, pt(F(1, 2), F(1, 2)))
    assert ls.K == 1 and ls.levels[0].S == F(1, 2) and ls.levels[0].facets == (2, 3, 4)


def test_levels_reject_exterior(cp2):
    with pytest.raises(NotInterior):
        level_structure_at(cp2, pt(1, 1))


def test_basis_examples(cp2, rect):
    b = integer_basis(level_structure_at(cp2, pt(F(1, 3), F(1, 3))))
    assert b.is_identity()
    b = integer_basis(level_structure_at(rect, pt(F(1, 2), F(3, 4))))
    assert b.vectors == ((1, 0), (0, 1)) and b.level_of == (1, 2)


def test_basis_cp3_blowup_case1():
    P = poly("cp3_blowup_line", alpha=F(1, 2))
    ls = level_structure_at(P, run_filtration(P).u0)
    b = integer_basis(ls)
    lvl1 = {b.vectors[i] for i in b.indices_of_level(1)}
    # level 1 sees (1,1,0) and e_3 up to sign and earlier vectors
    span = {(1, 1, 0), (0, 0, 1)}
    assert len(lvl1) == 2
    from torusfiber.linalg import rank
    assert rank(list(lvl1) + list(span)) == 2


@pytest.mark.parametrize("name", ["cp2", "rectangle", "blowup1", "blowup2", "hirzebruch", "cp3_blowup_line"])
def test_positivity_certificates_at_u0(name):
    P = poly(name)
    ls = level_structure_at(P, run_filtration(P).u0)
    certs = positivity_certificates(ls, integer_basis(ls))
    assert certs and all(all(w >= 0 for w in c.weights) for c in certs)


def test_no_certificate_off_u0(rect):
    ls = level_structure_at(rect, pt(F(1, 2), F(3, 4)))
    with pytest.raises(ValueError):
        positivity_certificates(ls, integer_basis(ls))

from fractions import Fraction as F

import pytest

from torusfiber.errors import DimensionUnsupported
from torusfiber.lte import (DEGENERATE, STRONG, UNKNOWN, count_balanced, mixed_volume, solve_at,
                            solve_level)
from torusfiber.novikov import GaussianRational as G
from torusfiber.potential import leading_term_system

from conftest import poly, pt


def _sorted_c(vals):
    return sorted((complex(v) for v in vals), key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def test_single_level_quadratic():
    P = poly("blowup1", alpha=F(1, 2))
    sys = leading_term_system(P, pt(F(3, 8), F(1, 4)))
    out = solve_level(sys, 1, {})
    assert sorted(r.values for r in out.roots) == [(F(-1),), (F(1),)]
    assert all(r.kind == STRONG for r in out.roots)


def test_cp2_roots_of_unity(cp2):
    res = solve_at(cp2, pt(F(1, 3), F(1, 3)))
    assert len(res) == 3 and res.profile()[STRONG] == 3
    for s in res:
        z = complex(s.y[0])
        assert abs(z ** 3 - 1) < 1e-12 and abs(complex(s.y[1]) - z) < 1e-12


def test_cp3_exact_roots():
    res = solve_at(poly("cp3"), pt(F(1, 4), F(1, 4), F(1, 4)))
    got = {s.y for s in res}
    i = G(0, 1)
    assert got == {(F(1),) * 3, (F(-1),) * 3, (i,) * 3, (-i,) * 3}


def test_blowup2_alpha0_quintic():
    P = poly("blowup2", alpha=0)
    res = solve_at(P, pt(0, 0))
    assert len(res) == 5
    for s in res:
        y1, y2 = complex(s.y[0]), complex(s.y[1])
        assert abs(y1 ** 5 + y1 ** 4 - 2 * y1 ** 3 - 2 * y1 ** 2 + 1) < 1e-9
        assert abs(y2 - 1 / (y1 ** 2 - 1)) < 1e-9


def test_blowup1_four_solutions():
    res = solve_at(poly("blowup1", alpha=F(1, 2)), pt(F(3, 8), F(1, 4)))
    i = G(0, 1)
    assert {s.y for s in res} == {(F(1), F(1)), (F(-1), F(1)), (i, F(-1)), (-i, F(-1))}
    assert all(s.exact and s.degeneracy == STRONG for s in res)


def test_blowup1_quartic_minimal_polynomial():
    res = solve_at(poly("blowup1", alpha=F(1, 3)), pt(F(1, 3), F(1, 3)))
    assert len(res) == 4
    for s in res:
        assert s.minimal_polynomials[0] == (1, 1, 0, 0, -1)
        a = complex(s.y[0])
        assert abs(a ** 4 + a ** 3 - 1) < 1e-9


def test_degenerate_family():
    P = poly("degenerate_pentagon")
    res = solve_at(P, pt(F(1, 3), F(1, 4)))
    assert "family" in res.flags
    assert all(s.degeneracy == DEGENERATE and s.multiplicity == UNKNOWN for s in res)
    assert {s.y[1] for s in res} == {F(-1)}
    assert res.count() == 0


def test_mixed_volume_cp2_support():
    sq = [(1, 0), (0, 1), (-1, -1)]
    assert mixed_volume([sq, sq]) == 3
    cube = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)]
    assert mixed_volume([cube] * 3) == 4


def test_seed_determinism():
    P = poly("cp3_blowup_line", alpha=F(1, 4))
    u = pt(F(1, 4), F(1, 4), F(1, 4))
    a = [s.y for s in solve_at(P, u, seed=3)]
    b = [s.y for s in solve_at(P, u, seed=3)]
    assert a == b


def test_count_balanced_blowup2_regimes():
    expected = {
        F(1, 2): {pt(0, 0): 4, pt(F(1, 2), F(1, 2)): 1},
        F(0): {pt(0, 0): 5},
        F(-1, 2): {pt(F(-1, 6), F(-1, 6)): 3, pt(F(1, 2), F(-1, 2)): 1, pt(F(-1, 2), F(1, 2)): 1},
    }
    for alpha, counts in expected.items():
        bc = count_balanced(poly("blowup2", alpha=alpha))
        assert {c.u: c.count for c in bc.interior} == counts
        assert bc.total == 5


def test_count_balanced_hirzebruch():
    bc = count_balanced(poly("hirzebruch", n=3, alpha=F(1, 4)))
    assert {c.u: c.count for c in bc.interior} == {pt(F(15, 16), F(3, 8)): 4}
    (ext,) = bc.exterior
    assert ext.u == pt(F(-3, 4), F(3, 2)) and "outside_polytope" in ext.flags
    assert bc.total == 4


def test_count_balanced_needs_points_in_dim3():
    with pytest.raises(DimensionUnsupported):
        count_balanced(poly("cp3"))
    bc = count_balanced(poly("cp3"), [pt(F(1, 4), F(1, 4), F(1, 4))])
    assert bc.total == 4


def test_family_stratum_not_counted():
    bc = count_balanced(poly("degenerate_pentagon"))
    assert bc.families and all(f.sample[1] == F(1, 4) for f in bc.families)
    assert bc.total == 2

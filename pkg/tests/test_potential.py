from fractions import Fraction as F

import numpy as np
import pytest

from torusfiber.errors import NotInterior, ZeroCoordinate
from torusfiber.novikov import NovikovSeries as N
from torusfiber.potential import build_po0, gradient, hessian_blocks, leading_term_system, zbar

from conftest import poly, pt


def test_symbolic_cp2():
    assert build_po0(poly("cp2")).to_text() == "y1*T^(u1) + y2*T^(u2) + y1^(-1)*y2^(-1)*T^(-u1-u2+1)"


def test_symbolic_hirzebruch():
    P = poly("hirzebruch", n=3, alpha=F(1, 4))
    assert build_po0(P).to_text() == (
        "y1*T^(u1) + y2*T^(u2) + y1^(-1)*y2^(-3)*T^(-u1-3*u2+3) + y2^(-1)*T^(-u2+3/4)")


def test_symbolic_rectangle():
    P = poly("rectangle", a=1, b=2)
    assert build_po0(P).to_text() == "y1*T^(u1) + y2*T^(u2) + y1^(-1)*T^(-u1+1) + y2^(-1)*T^(-u2+2)"


def test_numeric_po0_exponents(cp2):
    po = build_po0(cp2, pt(F(1, 5), F(1, 4)))
    assert po.terms == {(1, 0): N.monomial(1, F(1, 5)), (0, 1): N.monomial(1, F(1, 4)),
                        (-1, -1): N.monomial(1, F(11, 20))}


def test_exterior_point_rejected(cp2):
    with pytest.raises(NotInterior):
        build_po0(cp2, pt(1, 1))
    assert build_po0(cp2, pt(1, 1), allow_exterior=True).terms[(-1, -1)] == N.monomial(1, -1)


def test_gradient_cp2(cp2):
    u = pt(F(1, 5), F(1, 4))
    g = gradient(build_po0(cp2, u))
    assert g[0].terms == {(1, 0): N.monomial(1, F(1, 5)), (-1, -1): N.monomial(-1, F(11, 20))}
    const = build_po0(cp2, u) - build_po0(cp2, u)
    assert all(x.is_zero() for x in gradient(const))


def test_gradient_matches_linear_relation():
    P = poly("hirzebruch")
    u = pt(F(1, 2), F(1, 3))
    po = build_po0(P, u)
    for j in range(2):
        acc = build_po0(P, u) - po
        for i, f in enumerate(P.facets):
            z = zbar(P, u, i)
            for e, s in z.terms.items():
                acc = acc + type(z)(z.names, {e: s.scale(f.normal[j])})
        assert (acc - po.log_derivative(j)).is_zero()


def test_lte_blowup1_u0():
    P = poly("blowup1", alpha=F(1, 2))
    sys = leading_term_system(P, pt(F(3, 8), F(1, 4)))
    assert sys.render() == [
        "variables: y[1,1] = y2, y[2,1] = y1",
        "level 1 (S = 1/4): -y[1,1]^(-2) + 1 = 0",
        "level 2 (S = 3/8): -y[1,1]^(-1)*y[2,1]^(-2) + 1 = 0",
    ]


def test_lte_cp2(cp2):
    sys = leading_term_system(cp2, pt(F(1, 3), F(1, 3)))
    (lv,) = sys.systems
    for y1, y2 in [(1, 1), (2, 3), (-1, 0.5)]:
        log_eqs = [e.evaluate((y1, y2)) for e in lv.equations]
        assert abs(complex(log_eqs[0]) - (y1 - 1 / (y1 * y2))) < 1e-12
        assert abs(complex(log_eqs[1]) - (y2 - 1 / (y1 * y2))) < 1e-12
        plain = [e.evaluate((y1, y2)) for e in lv.plain_equations()]
        assert abs(complex(plain[0]) - (1 - 1 / (y1 ** 2 * y2))) < 1e-12


def test_lte_blowup2_second_point():
    P = poly("blowup2", alpha=F(1, 2))
    sys = leading_term_system(P, pt(F(1, 2), F(1, 2)))
    (lv,) = sys.systems
    y = sys.to_level_values((-1, -1))
    assert all(abs(complex(e.evaluate(y))) < 1e-12 for e in lv.equations)


def test_hessian_blocks():
    P = poly("blowup1", alpha=F(1, 2))
    sys = leading_term_system(P, pt(F(3, 8), F(1, 4)))
    blocks = hessian_blocks(sys, [1, 1])
    assert [b.shape for b in blocks] == [(1, 1), (1, 1)]
    assert all(abs(b[0, 0]) > 0.1 for b in blocks)
    with pytest.raises(ZeroCoordinate):
        hessian_blocks(sys, [0, 1])


def test_hessian_cp2(cp2):
    sys = leading_term_system(cp2, pt(F(1, 3), F(1, 3)))
    (H,) = hessian_blocks(sys, [1, 1])
    assert np.allclose(H, [[2, 1], [1, 2]])


def test_hessian_degenerate_family():
    P = poly("degenerate_pentagon")
    sys = leading_term_system(P, pt(F(1, 3), F(1, 4)))
    blocks = hessian_blocks(sys, sys.to_level_values((2, -1)))
    assert abs(blocks[-1]).max() < 1e-12

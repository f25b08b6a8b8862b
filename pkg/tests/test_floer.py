import math
from fractions import Fraction as F

import pytest

from torusfiber.errors import DimensionUnsupported, TruncationTooShort
from torusfiber.floer import displacement_report, hf_t2
from torusfiber.lift import check_mod
from torusfiber.novikov import NovikovSeries as N

from conftest import poly, pt


def test_hf_cp2_off_balanced(cp2):
    rep = hf_t2(cp2, pt(F(11, 30), F(1, 3)), [1, 1], 2)
    assert rep.free_rank == 0 and rep.torsion_exponents == (F(3, 10), F(3, 10))
    assert rep.parity["even"] == rep.parity["odd"] == "Lambda_0/(T^(3/10))"


def test_hf_rectangle(rect):
    rep = hf_t2(rect, pt(F(1, 2), F(3, 4)), [1, 1], 2)
    assert rep.torsion_exponents == (F(3, 4), F(3, 4))


def test_hf_balanced(cp2):
    rep = hf_t2(cp2, pt(F(1, 3), F(1, 3)), [1, 1], 2)
    assert rep.free_rank == 4 and rep.torsion_exponents == ()
    assert rep.basis == ("e_0", "e_1", "e_2", "e_12")


def test_hf_rank_bound_and_agreement_with_check_mod(cp2):
    for u in (pt(F(1, 3), F(1, 3)), pt(F(11, 30), F(1, 3)), pt(F(1, 4), F(1, 5))):
        rep = hf_t2(cp2, u, [1, 1], 2)
        assert rep.free_rank + 2 * len(rep.torsion_exponents) <= 4
        assert (rep.free_rank == 4) == check_mod(cp2, u, [1, 1], 2, margin=0).passed


def test_hf_errors(cp2):
    with pytest.raises(DimensionUnsupported):
        hf_t2(poly("cp3"), pt(F(1, 4), F(1, 4), F(1, 4)), [1, 1, 1], 2)
    short = [N({0: 1}, F(1, 10))] * 2
    with pytest.raises(TruncationTooShort):
        hf_t2(cp2, pt(F(1, 3), F(1, 3)), short, 2)


def test_displacement(cp2, rect):
    r = displacement_report(rect, pt(F(1, 2), F(3, 4)))
    assert r.energy_text == "2*pi*3/4" and math.isclose(r.energy_bound, 1.5 * math.pi)
    r = displacement_report(cp2, pt(F(1, 3), F(1, 3)), cap=2)
    assert r.balanced and r.min_intersections == 4
    r = displacement_report(cp2, pt(F(11, 30), F(1, 3)))
    assert not r.balanced and r.min_intersections == 4 and r.threshold.value == F(3, 10)

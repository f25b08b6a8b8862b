"""Acceptance criteria 1-12 and the property supplement.

Each test records one ``criterion N: PASS|FAIL`` line, printed in the pytest
terminal summary. Run this file alone with ``pytest tests/test_acceptance.py -v``.
"""

import cmath
import math
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from torusfiber.floer import displacement_report, hf_t2
from torusfiber.lift import AT_LEAST_CAP, EXACT, check_mod, lift, lift_all, po_threshold
from torusfiber.locator import run_filtration
from torusfiber.lte import STRONG, count_balanced, solve_at, solve_full
from torusfiber.novikov import INF, NovikovSeries as N, hensel_root
from torusfiber.polytope import betti_sum
from torusfiber.potential import build_po0, leading_term_system
from torusfiber.qcoh import verify_psi

from conftest import ACCEPTANCE_LINES, poly, pt


@pytest.fixture
def record(request):
    label = request.node.get_closest_marker("criterion").args[0]
    state = {"start": time.perf_counter()}
    yield state
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    secs = time.perf_counter() - state["start"]
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({secs:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _sym(cps):
    return [cp for cp in cps if cp.y[0] == cp.y[1] and cp.y[0].constant_term() == 1]


@pytest.mark.criterion("criterion 1: CP^n fibers, roots of unity, critical values")
def test_criterion_01(record):
    for n in (1, 2, 3):
        P = poly(f"cp{n}")
        u0 = run_filtration(P).u0
        assert u0 == tuple([F(1, n + 1)] * n)
        res = solve_at(P, u0)
        assert len(res) == n + 1
        zetas = sorted((complex(s.y[0]) for s in res), key=cmath.phase)
        expected = sorted((cmath.exp(2j * math.pi * k / (n + 1)) for k in range(n + 1)), key=cmath.phase)
        assert all(abs(a - b) < 1e-9 for a, b in zip(zetas, expected))
        for s in res:
            assert all(abs(complex(v) - complex(s.y[0])) < 1e-9 for v in s.y)
        for cp in lift_all(P, u0):
            ((e, c),) = cp.critical_value.terms
            assert e == F(1, n + 1)
            assert abs(complex(c) - (n + 1) * complex(cp.y[0].constant_term())) < 1e-9


@pytest.mark.criterion("criterion 2: rectangle filtration and four solutions")
def test_criterion_02(record):
    P = poly("rectangle", a=1, b=2)
    f = run_filtration(P)
    assert [s.S for s in f.steps] == [F(1, 2), F(1)] and f.u0 == pt(F(1, 2), 1)
    res = solve_at(P, f.u0)
    assert {s.y for s in res} == {(F(a), F(b)) for a in (1, -1) for b in (1, -1)}


@pytest.mark.criterion("criterion 3: two-point blow-up counts in three regimes, total 5")
def test_criterion_03(record):
    expected = {
        F(1, 2): {pt(0, 0): 4, pt(F(1, 2), F(1, 2)): 1},
        F(0): {pt(0, 0): 5},
        F(-1, 2): {pt(F(-1, 6), F(-1, 6)): 3, pt(F(1, 2), F(-1, 2)): 1, pt(F(-1, 2), F(1, 2)): 1},
    }
    for alpha, counts in expected.items():
        P = poly("blowup2", alpha=alpha)
        bc = count_balanced(P)
        assert {c.u: c.count for c in bc.interior} == counts
        assert bc.total == betti_sum(P) == 5


@pytest.mark.criterion("criterion 4: one-point blow-up regimes and the quartic")
def test_criterion_04(record):
    bc = count_balanced(poly("blowup1", alpha=F(1, 4)))
    assert {c.u: c.count for c in bc.interior} == {pt(F(1, 4), F(1, 2)): 1, pt(F(1, 3), F(1, 3)): 3}
    res = solve_at(poly("blowup1", alpha=F(1, 3)), pt(F(1, 3), F(1, 3)))
    assert len(res) == 4
    for s in res:
        assert s.minimal_polynomials[0] == (1, 1, 0, 0, -1)
        a = complex(s.y[0])
        assert abs(a ** 4 + a ** 3 - 1) < 1e-9
    res = solve_at(poly("blowup1", alpha=F(1, 2)), pt(F(3, 8), F(1, 4)))
    assert len(res) == 4 and res.profile()[STRONG] == 4


@pytest.mark.criterion("criterion 5: Hirzebruch F_3, interior 4, exterior root flagged")
def test_criterion_05(record):
    alpha = F(1, 4)
    P = poly("hirzebruch", n=3, alpha=alpha)
    bc = count_balanced(P)
    (c,) = bc.interior
    assert c.u == pt(3 * (1 + alpha) / 4, (1 - alpha) / 2) and c.count == 4 and c.profile[STRONG] == 4
    (ext,) = bc.exterior
    assert ext.u == pt(-3 * alpha, 1 + 2 * alpha) and "outside_polytope" in ext.flags
    assert bc.total == betti_sum(P) == 4


@pytest.mark.criterion("criterion 6: lifted series of the two-point blow-up")
def test_criterion_06(record):
    a = F(1, 2)
    P = poly("blowup2", alpha=a)
    (cp,) = _sym(lift_all(P, pt(0, 0), order=4 * a))
    assert [cp.y[0].coefficient(k * a) for k in range(4)] == [1, F(1, 2), F(-3, 8), F(1, 2)]
    assert cp.residual_valuation >= 4 * a
    assert check_mod(P, pt(0, 0), cp.y, 4 * a, relative=True).passed
    a = F(-1, 2)
    P = poly("blowup2", alpha=a)
    u = pt(a / 3, a / 3)
    order = 8 * abs(a) / 3
    (cp,) = _sym(lift_all(P, u, order=order))
    exps = [0, -2 * a / 3, -4 * a / 3, -2 * a]
    assert [cp.y[0].coefficient(e) for e in exps] == [1, F(1, 3), 0, F(-1, 81)]
    assert cp.residual_valuation >= order
    assert check_mod(P, u, cp.y, order, relative=True).passed


@pytest.mark.criterion("criterion 7: Hensel square root of 1+T to order 6")
def test_criterion_07(record):
    target = N({0: 1, 1: 1})
    r = hensel_root([-target, 0, 1], 1, 6)
    assert r.exact
    residual = (r * r - target).truncate(6)
    assert residual.is_zero() and residual.truncation_order == 6


@pytest.mark.criterion("criterion 8: quantum Stanley-Reisner and linear relations under psi_u")
def test_criterion_08(record):
    cases = [("cp2", {}, [pt(F(1, 5), F(1, 4)), pt(F(1, 2), F(1, 3))]),
             ("rectangle", {"a": 1, "b": 1}, [pt(F(1, 3), F(1, 2)), pt(F(2, 3), F(1, 5))]),
             ("blowup1", {"alpha": F(1, 3)}, [pt(F(1, 4), F(1, 3)), pt(F(1, 2), F(1, 5))]),
             ("blowup2", {"alpha": F(1, 2)}, [pt(0, 0), pt(F(1, 3), F(-1, 2))]),
             ("hirzebruch", {"n": 3, "alpha": F(1, 4)}, [pt(1, F(1, 3)), pt(F(1, 2), F(1, 2))])]
    for name, params, points in cases:
        P = poly(name, **params)
        for u in points:
            assert P.is_interior(u)
            rep = verify_psi(P, u)
            assert rep.passed and rep.qsr and len(rep.linear) == P.dim


@pytest.mark.criterion("criterion 9: Floer cohomology torsion exponents")
def test_criterion_09(record):
    cp2 = poly("cp2")
    rep = hf_t2(cp2, pt(F(1, 3) + F(1, 30), F(1, 3)), [1, 1], 2)
    assert rep.torsion_exponents == (F(1, 3) - F(1, 30),) * 2 == (F(3, 10),) * 2
    rep = hf_t2(poly("rectangle", a=1, b=2), pt(F(1, 2), F(3, 4)), [1, 1], 2)
    assert rep.torsion_exponents == (F(3, 4),) * 2
    rep = hf_t2(cp2, pt(F(1, 3), F(1, 3)), [1, 1], 2)
    assert rep.free_rank == 4 and rep.cap == 2


@pytest.mark.criterion("criterion 10: thresholds and displacement energy bounds")
def test_criterion_10(record):
    cp2, rect = poly("cp2"), poly("rectangle", a=1, b=2)
    for P, u, v in ((cp2, pt(F(11, 30), F(1, 3)), F(3, 10)), (rect, pt(F(1, 2), F(3, 4)), F(3, 4))):
        t = po_threshold(P, u)
        assert (t.value, t.status) == (v, EXACT)
        d = displacement_report(P, u)
        assert math.isclose(d.energy_bound, 2 * math.pi * float(v)) and d.min_intersections == 4
    t = po_threshold(cp2, pt(F(1, 3), F(1, 3)), cap=2)
    assert t.status == AT_LEAST_CAP
    d = displacement_report(cp2, pt(F(1, 3), F(1, 3)), cap=2)
    assert d.balanced and d.min_intersections == 4


@pytest.mark.criterion("criterion 11: blow-up of CP^3 along a line, totals 6")
def test_criterion_11(record):
    P = poly("cp3_blowup_line", alpha=F(1, 2))
    bc = count_balanced(P, [run_filtration(P).u0])
    assert [c.count for c in bc.interior] == [6] and betti_sum(P) == 6
    # boundary of the regimes, alpha = (l-1)/(n+1)
    bc = count_balanced(poly("cp3_blowup_line", alpha=F(1, 4)), [pt(F(1, 4), F(1, 4), F(1, 4))])
    assert bc.total == 6
    # below the boundary the count splits over two fibers
    P = poly("cp3_blowup_line", alpha=F(1, 8))
    bc = count_balanced(P, [pt(F(1, 4), F(1, 4), F(1, 4)), pt(F(1, 8), F(1, 8), F(3, 8))])
    assert [c.count for c in bc.interior] == [4, 2] and bc.total == 6


@pytest.mark.criterion("criterion 12: degenerate family and the hand series")
def test_criterion_12(record):
    P = poly("degenerate_pentagon")
    beta = F(1, 4)
    for u1 in (F(3, 10), F(1, 3), F(7, 20)):
        res = solve_at(P, pt(u1, beta))
        assert "family" in res.flags and all(s.degeneracy == "degenerate" for s in res)
    lam1 = F(1, 3) - beta
    c = -(0.25) ** (1 / 3)
    y = [N.constant(2 * c), N({0: -1, lam1: c})]
    r = check_mod(P, pt(F(1, 3), beta), y, 2 * lam1, relative=True)
    assert r.passed and min(r.valuations) >= 2 * lam1


@pytest.mark.criterion("supplement: valuation axioms on 1000 random pairs")
def test_supplement_valuation(record):
    rng = random.Random(0)

    def rnd():
        terms = {F(rng.randint(0, 12), rng.choice([1, 2, 3])): F(rng.randint(-4, 4), rng.randint(1, 3))
                 for _ in range(rng.randint(0, 4))}
        return N(terms)

    for _ in range(1000):
        a, b = rnd(), rnd()
        va, vb = a.valuation(), b.valuation()
        assert (a * b).valuation() == (va + vb if INF not in (va, vb) else INF)
        s = a + b
        if not s.is_zero():
            assert s.valuation() >= min(va, vb)
            if va != vb:
                assert s.valuation() == min(va, vb)


@pytest.mark.criterion("supplement: truncation coherence")
def test_supplement_truncation(record):
    rng = random.Random(1)
    checked = 0
    for _ in range(300):
        a = N({F(rng.randint(0, 8), 2): rng.randint(1, 5) for _ in range(3)})
        b = N({F(rng.randint(0, 8), 3): rng.randint(-5, -1) for _ in range(3)})
        order = F(rng.randint(1, 10), 2)
        assert (a + b).truncate(order) == a.truncate(order) + b.truncate(order)
        na, nb = order - b.valuation(), order - a.valuation()
        if na <= a.valuation() or nb <= b.valuation():
            continue
        checked += 1
        assert (a * b).truncate(order) == (a.truncate(na) * b.truncate(nb)).truncate(order)
    assert checked > 50


@pytest.mark.criterion("supplement: lift uniqueness across truncation caps")
def test_supplement_uniqueness(record):
    for name, params in (("blowup2", {"alpha": F(1, 2)}), ("blowup1", {"alpha": F(1, 2)}),
                         ("hirzebruch", {})):
        P = poly(name, **params)
        sys = leading_term_system(P, run_filtration(P).u0)
        for sol in solve_full(sys):
            if sol.degeneracy != STRONG:
                continue
            short, long = lift(sys, sol, F(1)), lift(sys, sol, F(2))
            for ys, yl in zip(short.y, long.y):
                assert yl.truncate(ys.truncation_order) == ys


@pytest.mark.criterion("supplement: gradient against finite differences")
def test_supplement_gradient(record):
    rng = np.random.default_rng(5)
    for name in ("cp1", "cp2", "cp3", "rectangle", "blowup1", "blowup2", "hirzebruch", "cp3_blowup_line",
                 "degenerate_pentagon"):
        P = poly(name)
        po = build_po0(P, run_filtration(P).u0)
        for _ in range(10):
            y = np.exp(rng.normal(size=P.dim) * 0.3 + 1j * rng.uniform(-3, 3, size=P.dim))
            t = float(rng.uniform(0.2, 0.8))
            for j in range(P.dim):
                h = 1e-5
                up, dn = y.copy(), y.copy()
                up[j] *= cmath.exp(h)
                dn[j] *= cmath.exp(-h)
                fd = (po.evaluate_numeric(up, t) - po.evaluate_numeric(dn, t)) / (2 * h)
                exact = po.log_derivative(j).evaluate_numeric(y, t)
                assert abs(fd - exact) / max(abs(exact), 1e-12) < 1e-6 or abs(fd - exact) < 1e-9

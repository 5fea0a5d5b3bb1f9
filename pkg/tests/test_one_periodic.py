import math
from fractions import Fraction

import pytest

from pcfrac.alpha import IrrationalSpec, PeriodicCF
from pcfrac.numerics import Ordering, PrecisionPolicy, UndecidableComparison, cmp
from pcfrac.one_periodic import (
    D_ell_periodic,
    PeriodicAlpha,
    admissibility_inequality,
    admissibility_scan,
    admissibility_threshold,
    asymptotic_ratio,
    curve_data,
    pm_asymptotic,
    pm_real,
    solve_pm,
    theorem13_check,
    theta_identity,
    threshold_ratio,
    threshold_residual,
)
from pcfrac.regular_cf import D_ell, expand_regular


@pytest.mark.parametrize("a", range(1, 6))
def test_R_closed_form(a):
    al = PeriodicAlpha(a)
    assert [al.R(n) for n in range(4)] == [0, 1, a, a * a + 1]
    for n in range(61):
        lo, hi = al.R_closed_form(n).at(256).fractions()
        assert lo <= al.R(n) <= hi


@pytest.mark.parametrize("a", range(1, 6))
def test_regular_convergents_are_R_ratios(a):
    exp = expand_regular(PeriodicAlpha(a).spec, 41)
    assert set(exp.b) == {a}
    for n in range(1, 41):
        assert exp.p[n - 1] == exp.q[n]


@pytest.mark.parametrize("a", range(1, 6))
def test_D_ell_agrees_with_recurrence(a):
    exp = expand_regular(IrrationalSpec(PeriodicCF((), (a,))), 30)
    al = PeriodicAlpha(a)
    for ell in range(12):
        assert D_ell(3, ell, exp) == D_ell_periodic(a, ell) == al.R(ell + 1)


def test_theta_examples():
    lhs, rhs = theta_identity(1, 0)
    assert lhs.fractions() == (1, 1) == rhs.fractions()
    lhs, rhs = theta_identity(1, 3)
    assert lhs.intersects(rhs)
    assert float(lhs) == pytest.approx(0.2360679774997897)
    lhs, rhs = theta_identity(2, 5)
    assert lhs.intersects(rhs) and lhs.width <= Fraction(1, 2**64)
    assert float(rhs) == pytest.approx((1 + math.sqrt(2)) ** -5)


def test_f_strictly_decreasing_on_grid():
    for a, m in ((1, 5), (2, 8), (4, 12)):
        vals = [threshold_ratio(a, m, Fraction(k, 40)) for k in range(1, 40)]
        for u, v in zip(vals, vals[1:]):
            assert cmp(u, v) is Ordering.GT


@pytest.mark.parametrize("m,lo,hi", [(5, "0.25", "0.3"), (6, "0.2", "0.25"), (8, "0.16", "0.18")])
def test_pm_brackets_from_table(m, lo, hi):
    iv = solve_pm(1, m)
    a, b = iv.fractions()
    assert Fraction(lo) < a and b < Fraction(hi)
    assert b - a <= Fraction(1, 2**64)


def test_pm_residual_straddles_zero():
    iv = solve_pm(3, 9, Fraction(1, 2**70))
    lo, hi = iv.fractions()
    h = threshold_residual(3, 9)
    assert cmp(h(lo), 0) is Ordering.GT and cmp(h(hi), 0) is Ordering.LT


def test_pm_needs_m_at_least_three():
    with pytest.raises(ValueError):
        solve_pm(1, 2)
    with pytest.raises(ValueError):
        pm_asymptotic(1, 2)


@pytest.mark.parametrize("a", [1, 3])
def test_asymptotic_decay(a):
    def scaled_gap(m):
        return abs(float(solve_pm(a, m, Fraction(1, 2**60)).midpoint) - float(pm_asymptotic(a, m))) * m**3

    c = 1.5 * scaled_gap(10)
    for m in (15, 20, 30):
        assert scaled_gap(m) <= c


def test_leading_term_at_forty():
    assert asymptotic_ratio(1, 40) == pytest.approx(1, rel=0.05)


def test_admissibility_examples():
    p = solve_pm(1, 12).midpoint
    for k in [*range(-5, 0), *range(2, 7)]:
        assert admissibility_inequality(1, 12, p, k)
    assert admissibility_inequality(1, 12, Fraction(9, 10), 2)
    with pytest.raises(ValueError):
        admissibility_inequality(1, 12, p, -12)


def test_k_one_is_the_defining_tie():
    small = PrecisionPolicy(max_bits=512)
    with pytest.raises(UndecidableComparison):
        admissibility_inequality(1, 12, pm_real(1, 12), 1, small)


def test_scan_and_threshold():
    scan = admissibility_scan(1, 10)
    assert scan.holds and scan.tail_from is not None
    assert scan.as_dict()["k_min"] == -9
    assert not admissibility_scan(1, 3).holds
    rep = admissibility_threshold(1, 12)
    assert rep.threshold == 4 and rep.failing == [3]
    assert admissibility_threshold(2, 10).threshold == 3


@pytest.mark.parametrize("a,m,below,above", [
    (1, 6, Fraction(21, 13), Fraction(13, 8)),
    (1, 8, Fraction(55, 34), Fraction(34, 21)),
    (2, 7, Fraction(985, 408), Fraction(408, 169)),
])
def test_theorem13(a, m, below, above):
    rep = theorem13_check(a, m)
    assert (rep.first_below, rep.first_above) == (below, above)
    assert rep.oracle_below == below and rep.oracle_above == above
    assert rep.ok


def test_curve_data_shape():
    data = curve_data(1, 6, samples=50)
    assert len(data["curve"]) == 51
    assert [k for k, _, _ in data["points"]] == list(range(-3, 4))
    # Q_m and Q_{m+1} sit on the curve (floating point check)
    p, t = float(data["p"]), data["t"]
    for k, x, y in data["points"]:
        if k in (0, 1):
            assert (x / t) ** p + (t * y) ** p == pytest.approx(t**p, rel=1e-9)


def test_periodic_alpha_validation():
    with pytest.raises(ValueError):
        PeriodicAlpha(0)
    assert PeriodicAlpha(1).convergent(5) == Fraction(13, 8)

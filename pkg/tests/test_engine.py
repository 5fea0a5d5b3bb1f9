import dataclasses
import math
import random
from fractions import Fraction

import pytest

from pcfrac.alpha import parse
from pcfrac.cli import TABLE1_EXPECTED, TABLE1_P
from pcfrac.engine import (
    SEED,
    LatticePoint,
    WindowExhausted,
    check_invariants,
    convergents_from_terms,
    crossing_t,
    crossing_w2,
    expand,
    gcd_normalize,
    skip_profile,
    transform_cf,
)
from pcfrac.mordell import constants
from pcfrac.numerics import PrecisionPolicy, Real, UndecidableComparison, pow_real, stretched_quasinorm
from pcfrac.one_periodic import pm_real
from pcfrac.regular_cf import expand_regular, lattice_y

SMALL = PrecisionPolicy(max_bits=512)


def _row(fractions):
    return " ".join(str(f) for f in fractions)


@pytest.mark.parametrize("p", TABLE1_P)
def test_table1_rows(p):
    assert _row(expand("phi", Fraction(p), 10).fractions()) == TABLE1_EXPECTED[p]


def test_three_minus_e_first_points():
    exp = expand("neg:e+3", Fraction(1, 2), 4)
    assert exp.alpha.integer_part_shift == 0
    assert exp.convergents[:2] == ((0, 1), (2, 7))
    pts = exp.points()
    assert pts[0].s == 1 and pts[0].r == 0  # y = -alpha
    assert pts[1].s == 7 and pts[1].r == 2


def test_seed_crossing_closed_form():
    alpha = parse("phi-2").real()
    cand = LatticePoint(1, 0, lattice_y(0, 1, alpha))
    half = Fraction(1, 2)
    w2 = crossing_w2(SEED, cand, half)
    expected = 1 / (1 - pow_real(abs(cand.y), half))
    assert w2.at(128).intersects(expected.at(128))
    t = crossing_t(SEED, cand, half)
    # both points lie on the same stretched ball at the returned t
    assert stretched_quasinorm(0, 1, half, t).at(100).intersects(
        stretched_quasinorm(1, cand.y, half, t).at(100))


def test_crossing_t_preconditions():
    alpha = parse("phi-2").real()
    a = LatticePoint(2, -1, lattice_y(-1, 2, alpha))
    b = LatticePoint(3, -1, lattice_y(-1, 3, alpha))
    with pytest.raises(ValueError):
        crossing_t(b, a, Fraction(1, 2))
    with pytest.raises(ValueError):
        crossing_t(SEED, LatticePoint(1, 1, Real.exact(2)), Fraction(1, 2))
    # a floor above the crossing means the point would already be inside
    assert crossing_t(SEED, a, Fraction(1, 2), t_floor=100) is None


def test_coefficients_reproduce_convergents_and_integrality():
    exp = expand("surd:(3+2*sqrt(11))/7", Fraction(3, 10), 15)
    assert convergents_from_terms(exp.a0, exp.terms) == exp.fractions()
    assert all(isinstance(e, int) and isinstance(a, int) for e, a in exp.terms)
    # first determinant is s_0^2
    assert exp.dets[0] == exp.convergents[0][1] ** 2


def test_expansion_invariants_on_corpus(surd_corpus):
    for p in (Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)):
        consts = constants(p)
        for spec in surd_corpus[:6]:
            exp = expand(spec, p, 12, consts=consts)
            assert check_invariants(exp, consts) == []
            reg = expand_regular(spec, max(exp.regular_indices) + 1)
            for (r, s), k in zip(exp.convergents, exp.regular_indices):
                assert (reg.p[k], reg.q[k]) == (r, s)


def test_skip_profile_phi_half():
    exp = expand("phi", Fraction(1, 2), 10)
    assert skip_profile(exp) == [2] + [1] * 8


def test_skip_profile_near_one_regression(surd_corpus):
    # empirical snapshot: close to p = 1 nearly every gap is 1 or 2
    gaps = []
    for spec in surd_corpus:
        gaps += skip_profile(expand(spec, Fraction(19, 20), 20))
    small = sum(1 for g in gaps if g in (1, 2))
    assert small / len(gaps) > 0.95


def test_transform_identity_and_random():
    exp = expand("surd:(1+1*sqrt(7))/3", Fraction(2, 5), 7)
    terms = list(exp.terms)
    assert transform_cf(terms, [1] * len(terms)) == [(Fraction(e), Fraction(a)) for e, a in terms]
    rng = random.Random(3)
    rhos = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9)) for _ in terms]
    assert convergents_from_terms(exp.a0, transform_cf(terms, rhos)) == exp.fractions()
    with pytest.raises(ZeroDivisionError):
        transform_cf(terms, [0] * len(terms))
    with pytest.raises(ValueError):
        transform_cf(terms, [1])


def test_gcd_normalize_preserves_convergents(surd_corpus):
    for spec in surd_corpus[:5]:
        exp = expand(spec, Fraction(1, 5), 10)
        norm = gcd_normalize(exp.terms)
        assert convergents_from_terms(exp.a0, norm) == exp.fractions()
        for m in range(len(norm) - 1):
            assert math.gcd(norm[m][0], norm[m][1], norm[m + 1][0]) == 1


def test_tie_at_threshold_exponent():
    # at p = p(6) for phi the points for 21/13 and 13/8 reach the ball together
    p = pm_real(1, 6)
    consts = constants(Fraction(1, 5))
    with pytest.raises(UndecidableComparison):
        expand("phi", p, 3, SMALL, consts=consts)
    exp = expand("phi", p, 3, SMALL, consts=consts, tie_break=True)
    assert exp.fractions() == [Fraction(21, 13), Fraction(34, 21), Fraction(55, 34)]
    assert exp.ties == (0,)


def test_window_exhaustion_is_loud():
    fake = dataclasses.replace(constants(Fraction(1, 2)), ell_max=-1)
    with pytest.raises(WindowExhausted):
        expand("phi", Fraction(1, 5), 3, consts=fake)


def test_expand_rejects_bad_terms():
    with pytest.raises(ValueError):
        expand("phi", Fraction(1, 2), 0)


def test_determinism():
    a = expand("surd:(5-3*sqrt(13))/4", Fraction(7, 10), 20)
    b = expand("surd:(5-3*sqrt(13))/4", Fraction(7, 10), 20)
    assert a.convergents == b.convergents and a.terms == b.terms and a.dets == b.dets

from __future__ import annotations

import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicqm.padic_core import (
    Ball,
    BallRelation,
    PAdicApprox,
    additive_character,
    ball_relation,
    fractional_part,
    monna_image_of_ball,
    monna_map,
    norm,
    ord_p,
    partition,
    valuation_and_norm,
)

CAP = 24


def pa(q, p, cap=CAP):
    return PAdicApprox.from_rational(Fraction(q), p, cap)


def rationals(p, max_exp=4):
    units = st.integers(min_value=-10**6, max_value=10**6).filter(lambda n: n % p != 0)
    return st.builds(lambda u, e, d: Fraction(u * p**e if e >= 0 else u, 1 if e >= 0 else p**-e) / d,
                     units, st.integers(-max_exp, max_exp), st.sampled_from([1, 7, 11, 13]).filter(lambda d: d % p))


primes = st.sampled_from([2, 3, 5])


# -- valuation and norm


def test_valuation_of_zero():
    v, n = valuation_and_norm(PAdicApprox.zero(2))
    assert v == math.inf and n == 0


def test_valuation_of_one():
    assert valuation_and_norm(pa(1, 3)) == (0, Fraction(1))


def test_valuation_of_power_times_unit():
    assert valuation_and_norm(pa(25 * 7, 5)) == (2, Fraction(1, 25))


def test_digits_in_range_and_leading_nonzero():
    x = pa(Fraction(-7, 9), 3)
    assert all(0 <= d < 3 for d in x.digits)
    assert x.digits[0] != 0
    assert x.valuation <= x.resolution_cap


# -- arithmetic


def test_carry_one_plus_one_binary():
    s = pa(1, 2) + pa(1, 2)
    assert s.valuation == 1 and s.digits == (1,)


def test_p_times_inverse_is_one():
    x = pa(3, 3)
    assert (x * x.inverse()).to_fraction() == 1


def test_negation_round_trip():
    x = pa(Fraction(5, 3), 3)
    assert (x + (-x)).is_zero


def test_rejects_bad_digits():
    with pytest.raises(ValueError):
        PAdicApprox(3, 0, (3,), 5)
    with pytest.raises(ValueError):
        PAdicApprox(3, 0, (0, 1), 5)


@settings(max_examples=200, deadline=None)
@given(p=primes, data=st.data())
def test_valuation_multiplicative(p, data):
    x = data.draw(rationals(p))
    y = data.draw(rationals(p))
    assert ord_p(x * y, p) == ord_p(x, p) + ord_p(y, p)
    prod = pa(x, p) * pa(y, p)
    assert prod.valuation == pa(x, p).valuation + pa(y, p).valuation


@settings(max_examples=200, deadline=None)
@given(p=primes, data=st.data())
def test_arithmetic_matches_rationals_mod_cap(p, data):
    x = data.draw(rationals(p, 3))
    y = data.draw(rationals(p, 3))
    s = pa(x, p) + pa(y, p)
    # the sum agrees with x + y on every digit below its resolution cap
    assert ord_p(s.to_fraction() - (x + y), p) >= s.resolution_cap


@settings(max_examples=300, deadline=None)
@given(p=primes, data=st.data())
def test_ultrametric_inequality(p, data):
    x, y, z = (data.draw(rationals(p)) for _ in range(3))
    xs, ys, zs = pa(x, p), pa(y, p), pa(z, p)
    assert norm(xs - ys) <= max(norm(xs - zs), norm(zs - ys))


# -- fractional part and character


def test_fractional_part_examples():
    assert fractional_part(pa(0, 2)) == 0
    assert fractional_part(pa(Fraction(1, 2), 2)) == Fraction(1, 2)
    assert fractional_part(pa(Fraction(1, 3) + 2 + 3, 3)) == Fraction(1, 3)


def test_character_examples():
    assert additive_character(pa(17, 3)) == 1
    assert abs(additive_character(pa(Fraction(1, 2), 2)) - (-1)) < 1e-15
    assert abs(additive_character(pa(Fraction(1, 3), 3)) - cmath.exp(2j * math.pi / 3)) < 1e-15


@settings(max_examples=300, deadline=None)
@given(p=primes, data=st.data())
def test_character_homomorphism(p, data):
    x = data.draw(rationals(p))
    y = data.draw(rationals(p))
    lhs = additive_character(pa(x, p) + pa(y, p))
    rhs = additive_character(pa(x, p)) * additive_character(pa(y, p))
    assert abs(lhs - rhs) < 1e-12


# -- Monna map


def test_monna_examples():
    assert monna_map(PAdicApprox.zero(3)) == 0
    assert monna_map(pa(1, 2)) == Fraction(1, 2)
    assert monna_map(pa(Fraction(1, 3) + 2, 3)) == Fraction(5, 3)


def test_monna_image_examples():
    assert monna_image_of_ball(Ball(5, 0)) == (0, 1)
    assert monna_image_of_ball(Ball(2, 1, Fraction(1))) == (Fraction(1, 2), Fraction(1))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_monna_measure_preservation_all_scales(p):
    gen = random.Random(p)
    for l in range(-6, 7):
        for _ in range(10):
            center = Fraction(gen.randrange(0, p**8), p**6)
            ball = Ball(p, l, center)
            lo, hi = monna_image_of_ball(ball)
            assert hi - lo == ball.haar_measure == Fraction(p) ** (-l)


@pytest.mark.parametrize("p", [2, 3])
def test_monna_images_of_partition_tile(p):
    # children images are disjoint and fill the parent's image
    ball = Ball(p, -1, Fraction(1, p))
    kids = sorted(monna_image_of_ball(b) for b in partition(ball, 1))
    lo, hi = monna_image_of_ball(ball)
    assert kids[0][0] == lo and kids[-1][1] == hi
    assert all(a[1] == b[0] for a, b in zip(kids, kids[1:]))


# -- balls


def test_ball_relation_examples():
    assert ball_relation(Ball(2, 0), Ball(2, 1)) is BallRelation.SECOND_IN_FIRST
    assert ball_relation(Ball(3, 1, Fraction(1)), Ball(3, 1, Fraction(2))) is BallRelation.DISJOINT
    b = Ball(5, 2, Fraction(7))
    assert ball_relation(b, b) is BallRelation.EQUAL


def test_ball_relation_prime_mismatch():
    with pytest.raises(ValueError):
        ball_relation(Ball(2, 0), Ball(3, 0))


def test_ball_equality_by_set():
    assert Ball(3, 1, Fraction(4)) == Ball(3, 1, Fraction(1))
    assert Ball(3, 1, Fraction(4)) != Ball(3, 2, Fraction(4))


def test_haar_measure_exact():
    assert Ball(3, -2).haar_measure == 9
    assert Ball(2, 3, Fraction(5)).haar_measure == Fraction(1, 8)


@pytest.mark.parametrize("p", [2, 3])
def test_ball_trichotomy_matches_membership(p):
    # one representative per coset of p^2 Z_p inside p^-2 Z_p resolves every ball tested
    points = [Fraction(n, p**2) for n in range(p**4)]
    balls = [b for l in range(-2, 2) for b in partition(Ball(p, -2), l)]
    member = {b: {q for q in points if b.contains(q)} for b in balls}
    for b1 in balls:
        for b2 in balls:
            s1, s2 = member[b1], member[b2]
            rel = ball_relation(b1, b2)
            expected = (BallRelation.EQUAL if s1 == s2 else BallRelation.FIRST_IN_SECOND if s1 < s2
                        else BallRelation.SECOND_IN_FIRST if s2 < s1 else BallRelation.DISJOINT)
            assert not (s1 & s2) or expected is not BallRelation.DISJOINT
            assert rel is expected


def test_exact_scalars_do_not_truncate():
    x = pa(Fraction(1, 5), 5, cap=1)
    assert (x * 5).to_fraction() == 1
    assert ((x * 5) * Fraction(2, 5)).to_fraction() == Fraction(2, 5)

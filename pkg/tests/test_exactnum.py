import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from monoq.exactnum import (
    NEG_INF,
    POS_INF,
    ExtReal,
    Interval,
    RatSet,
    cmp,
    parse_extreal,
    rat,
    simplest_rational_between,
)

rationals = st.fractions(min_value=-(10**6), max_value=10**6, max_denominator=10**4)
points = st.builds(ExtReal, rationals, rationals)


def test_cmp_sqrt2_beats_one():
    # 1 + sqrt2 vs 2: sqrt2 > 1
    assert cmp(ExtReal.sqrt2(1, 1), ExtReal.from_rat(2)) == 1


def test_cmp_equal_zero():
    assert cmp(ExtReal.from_rat(0), ExtReal.from_rat(0)) == 0


def test_cmp_seven_minus_five_sqrt2():
    # squaring oracle: 7^2 = 49 < 50 = 2 * 5^2, so 7 - 5*sqrt2 < 0
    assert 49 < 2 * 5 * 5
    assert cmp(ExtReal.sqrt2(-5, 7), ExtReal.from_rat(0)) == -1


def test_infinities():
    assert NEG_INF < ExtReal.from_rat(-(10**9)) < POS_INF
    assert cmp(POS_INF, POS_INF) == 0


@given(points, points, points)
@settings(max_examples=400)
def test_order_total_and_transitive(x, y, z):
    cs = {cmp(x, y), cmp(y, x)}
    assert cs in ({0}, {-1, 1})
    if cmp(x, y) <= 0 and cmp(y, z) <= 0:
        assert cmp(x, z) <= 0


@given(points, points)
@settings(max_examples=300)
def test_cmp_agrees_with_floats_when_separated(x, y):
    fx = float(x.a) + float(x.b) * math.sqrt(2)
    fy = float(y.a) + float(y.b) * math.sqrt(2)
    # only trust the float verdict when the gap dwarfs representation error
    if abs(fx - fy) > 1e-6 * (1 + abs(fx) + abs(fy)):
        assert cmp(x, y) == (-1 if fx < fy else 1)


@given(rationals, st.fractions(min_value=-1000, max_value=1000, max_denominator=1000))
@settings(max_examples=300)
def test_irrational_never_equals_rational(a, b):
    if b != 0:
        assert cmp(ExtReal(a, b), ExtReal.from_rat(a)) != 0


@given(points)
@settings(max_examples=300)
def test_floor(x):
    k = x.floor()
    assert ExtReal.from_rat(k) <= x < ExtReal.from_rat(k + 1)


def test_parse_roundtrip():
    for text in ["inf", "-inf", "3/4", "-3/4", "0", "1+1*s2", "7+-5*s2", "-1/2+2/3*s2"]:
        assert str(parse_extreal(text)) in (text, str(parse_extreal(str(parse_extreal(text)))))
    assert parse_extreal("1+1*s2") == ExtReal.sqrt2(1, 1)
    assert parse_extreal("7+-5*s2") == ExtReal.sqrt2(-5, 7)
    assert parse_extreal("-1/2+2/3*s2") == ExtReal(Fraction(-1, 2), Fraction(2, 3))


@given(points, points)
@settings(max_examples=200)
def test_simplest_rational_between(x, y):
    if cmp(x, y) < 0:
        q = simplest_rational_between(x, y)
        assert x < ExtReal.from_rat(q) < y


def test_interval_membership():
    iv = Interval.open(0, ExtReal.sqrt2())
    assert iv.contains(1)
    assert not iv.contains(0)
    assert not iv.contains(Fraction(3, 2))  # 3/2 > sqrt2
    assert Interval.point(5).contains(5)
    assert Interval.closed(0, 1).contains(0)


def test_interval_empty_and_degenerate():
    assert Interval.open(1, 1).is_empty()
    assert Interval(ExtReal.sqrt2(), ExtReal.sqrt2()).is_empty()
    assert Interval.point(2).is_degenerate()
    assert not Interval.open(0, Fraction(1, 10**6)).is_empty()


def test_closed_endpoint_must_be_rational():
    with pytest.raises(ValueError):
        Interval(ExtReal.sqrt2(), POS_INF, lo_closed=True)


def test_ratset_member_examples():
    a = RatSet.build([Interval.open(0, ExtReal.sqrt2())])
    assert a.member(1)
    a2 = RatSet.build([Interval.open(0, ExtReal.sqrt2())], removed=[1])
    assert not a2.member(1)
    a3 = RatSet.build([], added=[5])
    assert a3.member(5)
    assert not a3.member(4)


def test_ratset_infinite_and_bounds():
    a = RatSet.build([Interval.open(0, ExtReal.sqrt2())], added=[10])
    assert a.is_infinite()
    assert a.bounded_below() and a.bounded_above()
    assert a.upper_bound() == ExtReal.from_rat(10)
    b = RatSet.of_points([5])
    assert not b.is_infinite()
    assert RatSet.all_q().is_infinite()
    assert not RatSet.all_q().bounded_below()


def test_ratset_count_in_interval():
    a = RatSet.build([Interval.open(0, 1)], added=[5, 7])
    assert a.count_in_interval(Interval.open(0, 1)) == 3  # saturated: infinite
    assert a.count_in_interval(Interval.open(4, 8)) == 2
    assert a.count_in_interval(Interval.open(6, 8)) == 1
    assert a.count_in_interval(Interval.open(10, 20)) == 0


def test_ratset_subset():
    small = RatSet.build([Interval.open(0, 1)])
    big = RatSet.build([Interval.open(-1, 2)])
    assert small.subset_of(big)
    assert not big.subset_of(small)
    pts = RatSet.of_points([Fraction(1, 2), Fraction(1, 3)])
    assert pts.subset_of(small)
    holey = RatSet.build([Interval.open(-1, 2)], removed=[Fraction(1, 2)])
    assert not small.subset_of(holey)
    assert RatSet.build([Interval.open(0, 1)], removed=[Fraction(1, 2)]).subset_of(holey)

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from monoq.enumeration import (
    ALL_Q,
    D0Family,
    FiniteIrrationals,
    IndexOutOfRange,
    LexProduct,
    NotInCarrier,
    OfRatSet,
    Tagged,
    TaggedFactor,
    cw,
)
from monoq.exactnum import ExtReal, Interval, RatSet


def test_cw_prefix():
    # 1, 1/2, 2, 1/3, 3/2, 2/3, 3 ...
    assert [cw(k) for k in range(1, 8)] == [
        Fraction(1),
        Fraction(1, 2),
        Fraction(2),
        Fraction(1, 3),
        Fraction(3, 2),
        Fraction(2, 3),
        Fraction(3),
    ]


def test_allq_scheme():
    assert ALL_Q.nth(0) == 0
    assert ALL_Q.nth(3) == Fraction(1, 2)  # cw(2)
    assert ALL_Q.nth(6) == -2  # -cw(3)
    assert ALL_Q.nth(1) == 1 and ALL_Q.nth(2) == -1


def test_allq_index_examples():
    assert ALL_Q.index(Fraction(0)) == 0
    assert ALL_Q.index(Fraction(1, 2)) == 3


@given(st.integers(min_value=0, max_value=1000))
def test_allq_roundtrip(n):
    assert ALL_Q.index(ALL_Q.nth(n)) == n


def test_ofratset_singleton():
    e = OfRatSet(RatSet.of_points([5]))
    assert e.nth(0) == 5
    assert e.index(5) == 0
    assert e.size() == 1
    with pytest.raises(IndexOutOfRange):
        e.nth(1)
    with pytest.raises(NotInCarrier):
        e.index(4)


def test_ofratset_interval_roundtrip():
    e = OfRatSet(RatSet.build([Interval.open(0, ExtReal.sqrt2())]))
    seen = [e.nth(n) for n in range(50)]
    assert len(set(seen)) == 50
    for n, q in enumerate(seen):
        assert 0 < q and ExtReal.from_rat(q) < ExtReal.sqrt2()
        assert e.index(q) == n


def test_d0_family():
    d0 = D0Family()
    seen = [d0.nth(n) for n in range(60)]
    assert len(set(seen)) == 60
    for n, x in enumerate(seen):
        assert x.is_irrational and x.b.numerator == 1
        assert d0.index(x) == n
    # every rational interval of width >= 1/16 holds a family point
    for k in range(-8, 8):
        lo = Fraction(k, 4)
        assert any(
            ExtReal.from_rat(lo) < x < ExtReal.from_rat(lo + Fraction(1, 16))
            for x in (d0.nth(n) for n in range(4000))
        )


def test_tagged_order():
    lo, hi = Tagged(-1), Tagged(1)
    p = Tagged(0, ExtReal.from_rat(3))
    q = Tagged(0, ExtReal.sqrt2())
    assert lo < q < p < hi


def test_tagged_factor_roundtrip():
    fac = TaggedFactor(FiniteIrrationals([ExtReal.sqrt2()]), lo_tag=True)
    seen = [fac.nth(n) for n in range(40)]
    assert len(set(seen)) == 40
    for n, x in enumerate(seen):
        assert fac.index(x) == n
    fac2 = TaggedFactor(D0Family(), hi_tag=True)
    seen2 = [fac2.nth(n) for n in range(40)]
    assert len(set(seen2)) == 40
    for n, x in enumerate(seen2):
        assert fac2.index(x) == n


def test_lexproduct_roundtrip_and_coverage():
    prod = LexProduct(OfRatSet(RatSet.all_q()), ALL_Q)
    seen = [prod.nth(n) for n in range(200)]
    assert len(set(seen)) == 200
    for n, x in enumerate(seen):
        assert prod.index(x) == n
    # pairs terminate: a couple of specific pairs have finite index
    assert prod.index((Fraction(2), Fraction(-1, 2))) >= 0
    assert prod.index((Fraction(0), Fraction(0))) == 0

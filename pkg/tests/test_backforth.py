import random
from fractions import Fraction

import pytest

from monoq.backforth import (
    ExtensionSystem,
    LazyIso,
    NoAdmissibleSource,
    PartialMap,
    SeedInconsistent,
    ac_back_step,
    back_step,
    forth_step,
)
from monoq.enumeration import ALL_Q, OfRatSet
from monoq.exactnum import ExtReal, Interval, RatSet


def plain():
    return ExtensionSystem(ALL_Q, ALL_Q)


def test_forth_examples():
    sys = plain()
    m = forth_step(sys, PartialMap(), Fraction(0))
    assert m.pairs == [(Fraction(0), Fraction(0))]
    m = forth_step(sys, m, Fraction(1))
    assert m(Fraction(1)) == Fraction(1)
    m2 = forth_step(sys, PartialMap([(Fraction(0), Fraction(5))]), Fraction(-1))
    assert m2(Fraction(-1)) == Fraction(0)  # minimal index below 5


def test_back_examples():
    sys = plain()
    m = back_step(sys, PartialMap(), Fraction(0))
    assert m.pairs == [(Fraction(0), Fraction(0))]
    m = back_step(sys, m, Fraction(1))
    assert m(Fraction(1)) == Fraction(1)
    m = back_step(sys, PartialMap([(Fraction(0), Fraction(0))]), Fraction(-1))
    assert m(Fraction(-1)) == Fraction(-1)  # nth(AllQ,2) = -1 first admissible


def test_ac_back_pool():
    pool_set = RatSet.build([Interval.open(0, ExtReal.sqrt2())])
    sys = ExtensionSystem(ALL_Q, ALL_Q, strict=False)
    sys.ac_pool = (pool_set.member, ALL_Q)
    m = ac_back_step(sys, PartialMap(strict=False), Fraction(5))
    ((x, y),) = m.pairs
    assert y == 5 and pool_set.member(x)
    assert x == 1  # minimal-index rational in (0, sqrt2)

    # weak mode: target 5 already hit by a source outside the pool
    pool2 = RatSet.build([Interval.open(2, 3)])
    sys2 = ExtensionSystem(ALL_Q, ALL_Q, strict=False)
    sys2.ac_pool = (pool2.member, ALL_Q)
    m0 = PartialMap([(Fraction(1), Fraction(5))], strict=False)
    m2 = ac_back_step(sys2, m0, Fraction(5))
    added = [p for p in m2.pairs if p not in m0.pairs]
    ((x, y),) = added
    assert y == 5 and pool2.member(x)


def test_pool_failure():
    class SmallScan(ExtensionSystem):
        def scan_limit(self):
            return 500

    pool = RatSet.build([Interval.open(0, 1)])
    sys = SmallScan(OfRatSet(RatSet.build([Interval.open(0, 1)])), ALL_Q, strict=False)
    sys.ac_pool = (pool.member, ALL_Q)
    # every pool source is in (0,1) but must land below an existing 0 -> -5 pair
    m0 = PartialMap([(Fraction(0), Fraction(-5))], strict=False)
    with pytest.raises(NoAdmissibleSource):
        ac_back_step(sys, m0, Fraction(-10))


def test_partial_map_modes():
    with pytest.raises(SeedInconsistent):
        PartialMap([(Fraction(0), Fraction(1)), (Fraction(1), Fraction(1))])
    weak = PartialMap([(Fraction(0), Fraction(1)), (Fraction(1), Fraction(1))], strict=False)
    assert weak.admits(Fraction(1, 2), Fraction(1))
    assert not weak.admits(Fraction(1, 2), Fraction(2))


def test_plain_iso_is_identity_on_prefix():
    iso = LazyIso(plain())
    for n in range(40):
        q = ALL_Q.nth(n)
        assert iso.eval(q) == q


def test_query_order_independence():
    rng = random.Random(7)
    queries = [ALL_Q.nth(rng.randrange(200)) for _ in range(30)]
    base = None
    for perm in range(5):
        iso = LazyIso(plain())
        shuffled = list(queries)
        random.Random(perm).shuffle(shuffled)
        result = {q: iso.eval(q) for q in shuffled}
        if base is None:
            base = result
        assert result == base


def test_memo_strictly_monotone_every_stage():
    iso = LazyIso(plain())
    for _ in range(60):
        iso._run_stage()
        pairs = iso.memo.pairs
        for (s1, t1), (s2, t2) in zip(pairs, pairs[1:]):
            assert s1 < s2 and t1 < t2


def test_prefix_surjectivity():
    iso = LazyIso(plain())
    n = 50
    iso.advance_to_stage(n)
    for k in range(n):
        assert iso.memo.has_target(ALL_Q.nth(k))


def test_restriction_closure():
    iso = LazyIso(plain())
    iso.advance_to_stage(30)
    dom = iso.memo.domain()
    sub = iso.memo.restriction(dom[::2])
    # any restriction is again an increasing partial map of the system
    assert all(sub.admits(s, t) or s in sub for s, t in sub.pairs)


def test_seed_extension():
    seed = PartialMap([(Fraction(0), Fraction(7))])
    iso = LazyIso(plain(), seed=seed)
    assert iso.eval(Fraction(0)) == 7
    assert iso.eval(Fraction(1)) > 7
    assert iso.eval(Fraction(-1)) < 7

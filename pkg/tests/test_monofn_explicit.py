from fractions import Fraction

import pytest

from monoq.exactnum import ExtReal, Interval, RatSet
from monoq.monofn import (
    BB,
    UU,
    Affine,
    Block,
    Btype,
    Const,
    ExplicitFn,
    IsoTo,
    PeriodicSet,
    bounded_iso_fn,
    compose,
    const_fn,
    floor_like_fn,
    identity_fn,
    step_at_irrational,
    step_fn,
)

F = Fraction


def test_eval_identity_and_step():
    ident = identity_fn()
    assert ident(F(7, 3)) == F(7, 3)
    s = step_fn()
    assert s(-5) == 0
    assert s(F(1, 2)) == 1
    assert s(0) == 0  # boundary belongs to the lower block


def test_floor_like_eval():
    f = floor_like_fn()
    # block containing 1/2 has k = 0 since sqrt2/2 > 1/2
    assert f(F(1, 2)) == 0
    assert f(1) == 1  # 1 > sqrt2/2
    assert f(-1) == -1
    assert f(F(3, 4)) == 1  # 3/4 > sqrt2/2 ~ 0.707
    assert f(100) == 100
    assert f(F(-29, 7)) in (-5, -4)


def test_floor_like_monotone():
    f = floor_like_fn()
    qs = sorted(F(n, 7) for n in range(-30, 30))
    vals = [f(q) for q in qs]
    assert vals == sorted(vals)


def test_dc_points_examples():
    assert identity_fn().dc_points() == ([], False)
    assert const_fn(3).dc_points() == ([], False)
    pts, periodic = step_fn().dc_points()
    assert pts == [ExtReal.from_rat(0)] and not periodic
    pts, periodic = floor_like_fn().dc_points()
    assert periodic and pts == [ExtReal.sqrt2(F(1, 2))]


def test_limit_points_examples():
    assert const_fn(0).limit_points() == []
    lp = identity_fn().limit_points()
    assert len(lp) == 1 and lp[0].lo.inf == -1 and lp[0].hi.inf == 1
    assert not identity_fn().meta.lp_irr
    assert floor_like_fn().limit_points() == []
    assert floor_like_fn().meta.lp_irr  # vacuously: no limit points


def test_gen_inverse_examples():
    assert identity_fn().gen_inverse(3) == ("defined", ExtReal.from_rat(3))
    kind, lo, hi = const_fn(0).gen_inverse(0)
    assert kind == "undefined" and lo.inf == -1 and hi.inf == 1
    assert step_fn().gen_inverse(F(1, 2)) == ("defined", ExtReal.from_rat(0))
    # floor-like: value 0 sits on a plateau with irrational edges
    kind, lo, hi = floor_like_fn().gen_inverse(0)
    assert kind == "undefined"
    assert lo == ExtReal.sqrt2(F(1, 2)) - ExtReal.from_rat(1)
    assert hi == ExtReal.sqrt2(F(1, 2))
    # between plateaus the cut is a single irrational point
    assert floor_like_fn().gen_inverse(F(1, 2)) == ("defined", ExtReal.sqrt2(F(1, 2)))


def test_level_set():
    f = floor_like_fn()
    ls = f.level_set(2)
    half = ExtReal.sqrt2(F(1, 2))
    assert ls.lo == half + ExtReal.from_rat(1) and ls.hi == half + ExtReal.from_rat(2)
    assert f.level_set(F(1, 2)).is_empty()
    s = step_fn()
    assert s.level_set(0).hi == ExtReal.from_rat(0) and s.level_set(0).hi_closed


def test_image_specs():
    img = floor_like_fn().image_spec()
    assert isinstance(img, PeriodicSet)
    assert img.member(7) and img.member(-3) and not img.member(F(1, 2))
    img2 = step_fn().image_spec()
    assert img2.member(0) and img2.member(1) and not img2.member(F(1, 2))
    assert identity_fn().image_spec().member(F(22, 7))


def test_btype_metadata():
    assert identity_fn().meta.btype == UU
    assert const_fn(0).meta.btype == BB
    assert step_fn().meta.btype == BB
    assert floor_like_fn().meta.btype == UU
    assert bounded_iso_fn().meta.btype == BB


def test_bounded_iso_fn():
    f = bounded_iso_fn(0, 1)
    qs = sorted(F(n, 9) for n in range(-40, 40))
    vals = [f(q) for q in qs]
    assert vals == sorted(vals)
    assert len(set(vals)) == len(vals)  # injective
    assert all(0 < v < 1 for v in vals)
    assert f.meta.injective
    # surjective onto the target rationals: invert a few
    blk = f.blocks[0].action
    for y in [F(1, 2), F(1, 3), F(9, 10), F(1, 100)]:
        assert f(blk.invert(y)) == y


def test_iso_to_rejects_closed_ends():
    with pytest.raises(ValueError):
        IsoTo(Interval.closed(0, 1), Interval.open(0, 1))


def test_step_at_irrational_dc():
    s = step_at_irrational(ExtReal.sqrt2())
    assert s(1) == 0 and s(2) == 1
    pts, _ = s.dc_points()
    assert pts == [ExtReal.sqrt2()]
    assert s.meta.dc_irr_spec == (ExtReal.sqrt2(),)


def test_compose_eval_and_metadata():
    s = step_fn()
    ident = identity_fn()
    c = compose(ident, s)
    for q in [F(-3), F(0), F(1, 7), F(5)]:
        assert c(q) == s(q)
    c2 = compose(s, const_fn(0))
    assert c2(17) == s(0) == 0
    # boundedness propagates through an unbounded-unbounded outer map
    c3 = compose(identity_fn(), step_fn())
    assert c3.meta.btype == BB
    c4 = compose(floor_like_fn(), bounded_iso_fn())
    assert c4.meta.btype == BB


def test_blocks_must_tile_q():
    with pytest.raises(ValueError):
        ExplicitFn([Block(Interval.open(0, 1), Const(F(0)))])
    with pytest.raises(ValueError):
        ExplicitFn(
            [
                Block(Interval(ExtReal.from_rat(0), ExtReal.from_rat(1)), Const(F(0))),
            ],
            periodic=(F(2), F(1)),
        )


def test_block_images_must_increase():
    with pytest.raises(ValueError):
        ExplicitFn(
            [
                Block(Interval(ExtReal(inf=-1), ExtReal.from_rat(0), False, True), Const(F(5))),
                Block(Interval(ExtReal.from_rat(0), ExtReal(inf=1)), Const(F(3))),
            ]
        )

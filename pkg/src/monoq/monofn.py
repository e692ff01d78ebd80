"""Increasing endomorphisms of Q: explicit presentations and lazy constructions.

Two tiers share one interface.  The explicit tier is a finite block
presentation (with an optional periodic extension) on which order
metadata -- image, jump points, limit points, generalized inverses --
is computed exactly.  The lazy tier realizes the maps that admit no
finite presentation (generic surjections and injections, sparse
injections, lifts); each is a deterministic function of a canonical
Back&Forth engine, with every open choice resolved by minimal
enumeration index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .backforth import DEFAULT_FUEL
from .exactnum import NEG_INF, POS_INF, ExtReal, Interval, RatSet, rat


class ImageNotContained(Exception):
    pass


class ImageSpecMismatch(Exception):
    pass


class PlusConditionViolated(Exception):
    pass


@dataclass(frozen=True)
class Btype:
    """Which sides of the image are bounded (the four type-(2) classes)."""

    below: bool  # bounded below?
    above: bool  # bounded above?

    def __str__(self):
        return ("b" if self.below else "u") + ("b" if self.above else "u")

    @classmethod
    def parse(cls, text: str) -> "Btype":
        text = text.strip().lower()
        if len(text) != 2 or any(c not in "bu" for c in text):
            raise ValueError(f"bad boundedness type {text!r}")
        return cls(text[0] == "b", text[1] == "b")


BB = Btype(True, True)
BU = Btype(True, False)
UB = Btype(False, True)
UU = Btype(False, False)


@dataclass(frozen=True)
class PeriodicSet:
    """The set {w + k*shift : w in window, k integer}, e.g. all integers."""

    window: RatSet
    shift: Fraction

    def member(self, q) -> bool:
        q = rat(q)
        lb = self.window.lower_bound()
        if lb is None or self.shift <= 0:
            return False
        k = (ExtReal.from_rat(q) - lb).scale(Fraction(1, self.shift)).floor()
        return any(self.window.member(q - kk * self.shift) for kk in (k - 1, k, k + 1))

    def is_infinite(self) -> bool:
        return not self.window.is_empty()

    def bounded_below(self) -> bool:
        return self.window.is_empty()

    def bounded_above(self) -> bool:
        return self.window.is_empty()


ImageSpec = Union[RatSet, PeriodicSet]


# ---------------------------------------------------------------------------
# Block actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __call__(self, q: Fraction) -> Fraction:
        return self.value


@dataclass(frozen=True)
class Affine:
    slope: Fraction
    offset: Fraction

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("slope must be positive")

    def __call__(self, q: Fraction) -> Fraction:
        return self.slope * q + self.offset

    def invert(self, y: Fraction) -> Fraction:
        return (y - self.offset) / self.slope

    def image_point(self, p: ExtReal) -> ExtReal:
        return p.scale(self.slope) + ExtReal.from_rat(self.offset)


class IsoTo:
    """Map a block order-isomorphically onto all rationals of an interval.

    Realized as a canonical continuous staircase of affine pieces whose
    rational breakpoints walk dyadically toward any irrational, or in
    unit steps toward an infinite, endpoint.  Closed endpoints must be
    peeled into separate point blocks, so all ends here are open.
    """

    def __init__(self, source: Interval, target: Interval):
        if source.lo_closed or source.hi_closed or target.lo_closed or target.hi_closed:
            raise ValueError("IsoTo endpoints must be open (peel closed points)")
        if source.is_empty() or target.is_empty() or source.is_degenerate() or target.is_degenerate():
            raise ValueError("IsoTo needs fat open intervals")
        self.source = source
        self.target = target
        self._anchor_s = source.some_rational()
        self._anchor_t = target.some_rational()

    def __eq__(self, other):
        return (
            isinstance(other, IsoTo)
            and self.source == other.source
            and self.target == other.target
        )

    def __hash__(self):
        return hash((self.source, self.target))

    @staticmethod
    def _ladder(endpoint: ExtReal, n: int, from_below: bool) -> Optional[Fraction]:
        """n-th rational approaching the endpoint (None for infinite ends)."""
        if endpoint.inf != 0:
            return None
        if endpoint.is_rational:
            e = endpoint.as_rat()
            return e - Fraction(1, 2**n) if from_below else e + Fraction(1, 2**n)
        scaled = endpoint.scale(2**n)
        fl = scaled.floor()
        return Fraction(fl, 2**n) if from_below else Fraction(fl + 1, 2**n)

    def _pieces(self, toward_hi: bool):
        """Yield affine pieces (s0, s1, t0, t1) marching toward one end."""
        s_end = self.source.hi if toward_hi else self.source.lo
        t_end = self.target.hi if toward_hi else self.target.lo
        prev_s, prev_t = self._anchor_s, self._anchor_t
        n = 0
        step = 0
        while True:
            n += 1
            step += 1
            if s_end.inf != 0:
                cur_s = prev_s + step if toward_hi else prev_s - step
            else:
                cand = self._ladder(s_end, n, from_below=toward_hi)
                cur_s = cand if (cand > prev_s if toward_hi else cand < prev_s) else None
            if t_end.inf != 0:
                cur_t = prev_t + step if toward_hi else prev_t - step
            else:
                cand = self._ladder(t_end, n, from_below=toward_hi)
                cur_t = cand if (cand > prev_t if toward_hi else cand < prev_t) else None
            if cur_s is None or cur_t is None:
                continue
            if toward_hi:
                yield prev_s, cur_s, prev_t, cur_t
            else:
                yield cur_s, prev_s, cur_t, prev_t
            prev_s, prev_t = cur_s, cur_t
            step = 0

    def __call__(self, q: Fraction) -> Fraction:
        if q == self._anchor_s:
            return self._anchor_t
        toward_hi = q > self._anchor_s
        for s0, s1, t0, t1 in self._pieces(toward_hi):
            if s0 <= q <= s1:
                return t0 + (q - s0) * (t1 - t0) / (s1 - s0)
        raise RuntimeError("unreachable")

    def invert(self, y: Fraction) -> Fraction:
        if y == self._anchor_t:
            return self._anchor_s
        toward_hi = y > self._anchor_t
        for s0, s1, t0, t1 in self._pieces(toward_hi):
            if t0 <= y <= t1:
                return s0 + (y - t0) * (s1 - s0) / (t1 - t0)
        raise RuntimeError("unreachable")


Action = Union[Const, Affine, IsoTo]


@dataclass(frozen=True)
class Block:
    source: Interval
    action: Action


@dataclass(frozen=True)
class Meta:
    btype: Optional[Btype] = None
    image_spec: Optional[ImageSpec] = None
    dc_irr_spec: Optional[object] = None  # tuple of ExtReal, or a D0Family
    lp_irr: Optional[bool] = None
    injective: bool = False
    surjective_onto_spec: bool = False


class MonoFn:
    """Common interface of both tiers."""

    meta: Meta
    tier: str

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        raise NotImplementedError

    def __call__(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.eval(rat(q), fuel)


# ---------------------------------------------------------------------------
# Explicit tier
# ---------------------------------------------------------------------------


class ExplicitFn(MonoFn):
    """Finite consecutive blocks partitioning Q, or one periodic window.

    With ``periodic = (period, shift)`` the blocks cover a window of
    exactly one period and the map repeats shifted by ``shift`` per
    period (the floor-like families with irrational boundaries).
    """

    tier = "explicit"

    def __init__(self, blocks: Sequence[Block], periodic: Optional[Tuple[Fraction, Fraction]] = None):
        self.blocks = list(blocks)
        self.periodic = periodic
        self._validate()
        self.meta = self._derive_meta()

    def _validate(self):
        if not self.blocks:
            raise ValueError("at least one block")
        for b1, b2 in zip(self.blocks, self.blocks[1:]):
            if b1.source.hi.cmp(b2.source.lo) != 0:
                raise ValueError(f"blocks not consecutive at {b1.source.hi}")
            if b1.source.hi.is_rational and b1.source.hi_closed == b2.source.lo_closed:
                raise ValueError(f"boundary {b1.source.hi} covered twice or never")
        lo = self.blocks[0].source.lo
        hi = self.blocks[-1].source.hi
        if self.periodic is None:
            if lo.cmp(NEG_INF) != 0 or hi.cmp(POS_INF) != 0:
                raise ValueError("finite-block presentation must cover Q")
        else:
            period, shift = self.periodic
            if period <= 0 or shift <= 0:
                raise ValueError("period and shift must be positive")
            if (hi - lo).cmp(ExtReal.from_rat(period)) != 0:
                raise ValueError("periodic window must span exactly one period")
            if lo.is_rational and self.blocks[0].source.lo_closed == self.blocks[-1].source.hi_closed:
                raise ValueError("periodic window must cover its boundary exactly once")
        prev_sup = None
        for b in self.blocks:
            lo_v, _, hi_v, _ = block_value_range(b)
            if prev_sup is not None and prev_sup.cmp(lo_v) > 0:
                raise ValueError("block images must be weakly increasing")
            prev_sup = hi_v
        if self.periodic is not None:
            first_lo = block_value_range(self.blocks[0])[0]
            if prev_sup.cmp(first_lo + ExtReal.from_rat(self.periodic[1])) > 0:
                raise ValueError("periodic images must be weakly increasing across windows")

    # -- evaluation ------------------------------------------------------

    def _reduce(self, q: Fraction) -> Tuple[Fraction, int]:
        if self.periodic is None:
            return q, 0
        period, _ = self.periodic
        lo = self.blocks[0].source.lo
        k = (ExtReal.from_rat(q) - lo).scale(Fraction(1, period)).floor()
        q0 = q - k * period
        # q0 can only miss the window when it hits the open lower end;
        # the matching upper end is then closed one period up.
        if not any(b.source.contains(q0) for b in self.blocks):
            k -= 1
            q0 += period
        return q0, k

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        q = rat(q)
        q0, k = self._reduce(q)
        for b in self.blocks:
            if b.source.contains(q0):
                v = b.action(q0)
                if self.periodic is not None:
                    v += k * self.periodic[1]
                return v
        raise ValueError(f"no block contains {q0}")

    # -- exact metadata ----------------------------------------------------

    def _derive_meta(self) -> Meta:
        img = self.image_spec()
        if isinstance(img, PeriodicSet):
            below = above = False
        else:
            below, above = img.bounded_below(), img.bounded_above()
        injective = all(
            not isinstance(b.action, Const) or b.source.is_degenerate() for b in self.blocks
        )
        lp = self.limit_points()
        return Meta(
            btype=Btype(below, above),
            image_spec=img,
            dc_irr_spec=tuple(p for p, _, _ in self.jump_data() if p.is_irrational)
            if self.periodic is None
            else None,
            lp_irr=lp_subset_irrational(lp),
            injective=injective,
        )

    def image_spec(self) -> ImageSpec:
        window = RatSet.build(
            [block_image_interval(b) for b in self.blocks if not isinstance(b.action, Const)],
            added=[b.action.value for b in self.blocks if isinstance(b.action, Const)],
        )
        if self.periodic is not None:
            return PeriodicSet(window, self.periodic[1])
        return window

    def jump_data(self):
        """Genuine jumps in one window: (position, (left sup, cofinally
        attained), (right inf, cofinally attained))."""
        out = []
        candidates = []
        blocks = self.blocks
        for i in range(len(blocks) - 1):
            bnd = blocks[i].source.hi
            candidates.append((bnd, _side_limit(blocks[i], True), _side_limit(blocks[i + 1], False)))
        if self.periodic is not None:
            _, shift = self.periodic
            bnd = blocks[-1].source.hi
            rv, ra = _side_limit(blocks[0], False)
            candidates.append((bnd, _side_limit(blocks[-1], True), (rv + ExtReal.from_rat(shift), ra)))
        for bnd, (lv, la), (rv, ra) in candidates:
            if lv.cmp(rv) < 0:
                out.append((bnd, (lv, la), (rv, ra)))
        return out

    def dc_points(self) -> Tuple[List[ExtReal], bool]:
        """Jump positions (one window) and a periodic-repetition flag."""
        return [p for p, _, _ in self.jump_data()], self.periodic is not None

    def limit_points(self) -> List[Interval]:
        """Closure components of the image's limit points (one window).

        Components are reported as real-closed intervals; constant
        blocks contribute nothing (isolated values).
        """
        out = []
        for b in self.blocks:
            if isinstance(b.action, Const):
                continue
            iv = block_image_interval(b)
            if iv.has_infinitely_many():
                out.append(Interval(iv.lo, iv.hi))
        return out

    def level_set(self, y) -> Interval:
        """Convex preimage of a value (empty interval when unattained)."""
        y = rat(y)
        if self.periodic is None:
            return _finite_level_set(self.blocks, y)
        period, shift = self.periodic
        lo_v = block_value_range(self.blocks[0])[0]
        base = lo_v if lo_v.is_finite else ExtReal.from_rat(0)
        k = (ExtReal.from_rat(y) - base).scale(Fraction(1, shift)).floor()
        for kk in (k - 1, k, k + 1):
            sub = _finite_level_set(self.blocks, y - kk * shift)
            if not sub.is_empty():
                off = ExtReal.from_rat(kk * period)
                return Interval(sub.lo + off, sub.hi + off, sub.lo_closed, sub.hi_closed)
        return Interval.open(0, 0)

    # -- generalized inverse ------------------------------------------------

    def preimage_sup_below(self, y) -> ExtReal:
        """sup s^-1(-inf, y), with sup(empty) = -inf."""
        y = rat(y)
        blocks, y0, offset = self._window_for_value(y)
        best = NEG_INF
        for b in blocks:
            lo_v, lo_att, hi_v, hi_att = block_value_range(b)
            ye = ExtReal.from_rat(y0)
            fully_below = hi_v.cmp(ye) < 0 or (hi_v.cmp(ye) == 0 and not hi_att)
            if fully_below:
                cand = b.source.hi
            elif lo_v.cmp(ye) < 0:
                cand = _cut_position(b, y0)
            else:
                continue
            if best.cmp(cand) < 0:
                best = cand
        if best.cmp(NEG_INF) == 0 and offset is not None:
            lower_windows = blocks[0].source.lo  # everything below the window
            best = lower_windows
        return best + offset if (offset is not None and best.is_finite) else best

    def preimage_inf_above(self, y) -> ExtReal:
        """inf s^-1(y, +inf), with inf(empty) = +inf."""
        y = rat(y)
        blocks, y0, offset = self._window_for_value(y, from_right=True)
        best = POS_INF
        for b in reversed(blocks):
            lo_v, lo_att, hi_v, hi_att = block_value_range(b)
            ye = ExtReal.from_rat(y0)
            fully_above = lo_v.cmp(ye) > 0 or (lo_v.cmp(ye) == 0 and not lo_att)
            if fully_above:
                cand = b.source.lo
            elif hi_v.cmp(ye) > 0:
                cand = _cut_position(b, y0)
            else:
                continue
            if cand.cmp(best) < 0:
                best = cand
        if best.cmp(POS_INF) == 0 and offset is not None:
            best = blocks[-1].source.hi
        return best + offset if (offset is not None and best.is_finite) else best

    def _window_for_value(self, y: Fraction, from_right: bool = False):
        """Locate the periodic window where values cross y."""
        if self.periodic is None:
            return self.blocks, y, None
        period, shift = self.periodic
        win_lo, lo_att = block_value_range(self.blocks[0])[0:2]
        win_hi, hi_att = block_value_range(self.blocks[-1])[2:4]
        ye = ExtReal.from_rat(y)
        # crossing window: first k not fully below y (resp. last not fully
        # above); the estimate is off by at most the window span / shift <= 1
        k = (ye - win_lo).scale(Fraction(1, shift)).floor()
        candidates = [k - 2, k - 1, k, k + 1, k + 2]
        if from_right:
            candidates.reverse()
        for kk in candidates:
            lo_k = win_lo + ExtReal.from_rat(kk * shift)
            hi_k = win_hi + ExtReal.from_rat(kk * shift)
            fully_below = hi_k.cmp(ye) < 0 or (hi_k.cmp(ye) == 0 and not hi_att)
            fully_above = lo_k.cmp(ye) > 0 or (lo_k.cmp(ye) == 0 and not lo_att)
            if not from_right and not fully_below:
                return self.blocks, y - kk * shift, ExtReal.from_rat(kk * period)
            if from_right and not fully_above:
                return self.blocks, y - kk * shift, ExtReal.from_rat(kk * period)
        kk = candidates[-1]
        return self.blocks, y - kk * shift, ExtReal.from_rat(kk * period)

    def gen_inverse(self, y, fuel: int = DEFAULT_FUEL):
        """('defined', point) when both one-sided cuts agree, else
        ('undefined', sup-below, inf-above)."""
        s_l = self.preimage_sup_below(y)
        s_r = self.preimage_inf_above(y)
        if s_l.cmp(s_r) == 0:
            return ("defined", s_l)
        return ("undefined", s_l, s_r)


def _finite_level_set(blocks: Sequence[Block], y: Fraction) -> Interval:
    lo = hi = None
    lo_closed = hi_closed = False
    for b in blocks:
        part = _block_level_set(b, y)
        if part is None or part.is_empty():
            continue
        if lo is None:
            lo, lo_closed = part.lo, part.lo_closed
        hi, hi_closed = part.hi, part.hi_closed
    if lo is None:
        return Interval.open(0, 0)
    return Interval(lo, hi, lo_closed, hi_closed)


def _block_level_set(b: Block, y: Fraction) -> Optional[Interval]:
    act = b.action
    if isinstance(act, Const):
        return b.source if act.value == y else None
    if isinstance(act, Affine):
        x = act.invert(y)
        return Interval.point(x) if b.source.contains(x) else None
    if isinstance(act, IsoTo):
        return Interval.point(act.invert(y)) if act.target.contains(y) else None
    raise TypeError(act)


def _cut_position(b: Block, y: Fraction) -> ExtReal:
    """Where b's values cross y (y strictly inside the value range)."""
    act = b.action
    if isinstance(act, Const):
        raise ValueError("no crossing inside a constant block")
    if isinstance(act, Affine):
        return ExtReal.from_rat(act.invert(y))
    if isinstance(act, IsoTo):
        return ExtReal.from_rat(act.invert(y))
    raise TypeError(act)


def block_image_interval(b: Block) -> Interval:
    act = b.action
    if isinstance(act, Const):
        return Interval.point(act.value)
    if isinstance(act, Affine):
        lo = act.image_point(b.source.lo) if b.source.lo.is_finite else NEG_INF
        hi = act.image_point(b.source.hi) if b.source.hi.is_finite else POS_INF
        lo_cl = b.source.lo_closed and lo.is_rational
        hi_cl = b.source.hi_closed and hi.is_rational
        return Interval(lo, hi, lo_cl, hi_cl)
    if isinstance(act, IsoTo):
        return act.target
    raise TypeError(act)


def block_value_range(b: Block) -> Tuple[ExtReal, bool, ExtReal, bool]:
    """(inf, attained, sup, attained) of a block's values."""
    act = b.action
    if isinstance(act, Const):
        v = ExtReal.from_rat(act.value)
        return v, True, v, True
    iv = block_image_interval(b)
    return iv.lo, iv.lo_closed, iv.hi, iv.hi_closed


def _side_limit(b: Block, from_left: bool) -> Tuple[ExtReal, bool]:
    """One-sided value limit toward a block edge, with a cofinal-attainment
    flag (True only when the value is taken on a whole subinterval)."""
    act = b.action
    if isinstance(act, Const):
        return ExtReal.from_rat(act.value), True
    if isinstance(act, Affine):
        edge = b.source.hi if from_left else b.source.lo
        v = act.image_point(edge) if edge.is_finite else (POS_INF if from_left else NEG_INF)
        return v, False
    if isinstance(act, IsoTo):
        return (act.target.hi if from_left else act.target.lo), False
    raise TypeError(act)


def lp_subset_irrational(components: List[Interval]) -> bool:
    """True iff the limit-point set avoids all rationals."""
    for comp in components:
        if comp.lo.cmp(comp.hi) < 0:
            return False
        if comp.lo.is_rational:
            return False
    return True


# ---------------------------------------------------------------------------
# Convenient explicit builders
# ---------------------------------------------------------------------------


def identity_fn() -> ExplicitFn:
    return ExplicitFn([Block(Interval.all(), Affine(Fraction(1), Fraction(0)))])


def const_fn(value) -> ExplicitFn:
    return ExplicitFn([Block(Interval.all(), Const(rat(value)))])


def step_fn(at=0, low=0, high=1) -> ExplicitFn:
    """low on (-inf, at], high on (at, +inf)."""
    at, low, high = rat(at), rat(low), rat(high)
    return ExplicitFn(
        [
            Block(Interval(NEG_INF, ExtReal.from_rat(at), False, True), Const(low)),
            Block(Interval(ExtReal.from_rat(at), POS_INF, False, False), Const(high)),
        ]
    )


def step_at_irrational(at: ExtReal, low=0, high=1) -> ExplicitFn:
    return ExplicitFn(
        [
            Block(Interval(NEG_INF, at), Const(rat(low))),
            Block(Interval(at, POS_INF), Const(rat(high))),
        ]
    )


def floor_like_fn(period: Fraction = Fraction(1), shift: Fraction = Fraction(1)) -> ExplicitFn:
    """shift*k on (k*period - period + c, k*period + c) with c = period*sqrt2/2."""
    c = ExtReal.sqrt2(period / 2)
    p = ExtReal.from_rat(period)
    return ExplicitFn(
        [Block(Interval(c - p, c), Const(Fraction(0)))],
        periodic=(period, shift),
    )


def bounded_iso_fn(lo=0, hi=1) -> ExplicitFn:
    """An injective map of Q onto the rationals of (lo, hi)."""
    return ExplicitFn([Block(Interval.all(), IsoTo(Interval.all(), Interval.open(rat(lo), rat(hi))))])


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def compose(outer: MonoFn, inner: MonoFn) -> MonoFn:
    """outer after inner; metadata propagated where sound."""
    return ComposedFn(outer, inner)


class ComposedFn(MonoFn):
    tier = "lazy"

    def __init__(self, outer: MonoFn, inner: MonoFn):
        self.outer = outer
        self.inner = inner
        out_m, in_m = outer.meta, inner.meta
        btype = in_m.btype if out_m.btype == UU else None
        image = out_m.image_spec if in_m.surjective_onto_spec else None
        self.meta = Meta(
            btype=btype,
            image_spec=image,
            lp_irr=True if out_m.lp_irr else None,
            injective=out_m.injective and in_m.injective,
            surjective_onto_spec=out_m.surjective_onto_spec and in_m.surjective_onto_spec,
        )

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.outer.eval(self.inner.eval(rat(q), fuel), fuel)

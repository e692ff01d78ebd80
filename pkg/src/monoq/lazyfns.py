"""Engine-backed increasing maps: the constructions with no finite tiling.

Each constructor wires a canonical Back&Forth engine over a product
carrier whose gaps realize exactly the required irrational structure:

* generic surjections place every point-fiber at a full column of
  ``A x Q``, so fibers are convex with no extreme elements;
* injective maps with prescribed irrational jump set ``A`` interleave
  ``A`` into the first coordinate of the carrier, forcing a jump of the
  built map at every column and continuity everywhere else;
* lifts through such maps choose fiber placements by minimal index.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

from .backforth import (
    DEFAULT_FUEL,
    ExtensionSystem,
    LazyIso,
    NoAdmissibleSource,
    NoAdmissibleTarget,
    PartialMap,
    ProductSourceIso,
    ProductTargetIso,
    SeedInconsistent,
)
from .enumeration import IndexOutOfRange
from .cuts import ColumnEdge, Cut, FirstGap, InColumn, SourceCut, TargetCut, real_cmp
from .enumeration import (
    ALL_Q,
    D0Family,
    FiberFirstProduct,
    FiniteIrrationals,
    HI_TAG,
    LO_TAG,
    OfRatSet,
    Tagged,
    TaggedFactor,
)
from .exactnum import NEG_INF, POS_INF, ExtReal, Interval, RatSet, rat
from .monofn import (
    Btype,
    ExplicitFn,
    ImageNotContained,
    ImageSpecMismatch,
    Meta,
    MonoFn,
    PeriodicSet,
    PlusConditionViolated,
    UU,
)


def _rat_elem(q: Fraction) -> Tuple[Tagged, Fraction]:
    return (Tagged(0, ExtReal.from_rat(q)), Fraction(0))


class EngineInjective(MonoFn):
    """beta . j over (irr + Q + tags) x Q: injective, jumps exactly at the
    irrational part (and every rational), image limit points irrational."""

    tier = "lazy"

    def __init__(self, irr_part, btype: Btype, kind: str):
        self.kind = kind
        self.irr_part = irr_part
        self.factor = TaggedFactor(irr_part, lo_tag=btype.below, hi_tag=btype.above)
        self.product = FiberFirstProduct(self.factor)
        self.engine = LazyIso(ProductSourceIso(self.product, ALL_Q, strict=True))
        if isinstance(irr_part, FiniteIrrationals):
            dc_spec: object = irr_part.points
        elif irr_part is None:
            dc_spec = ()
        else:
            dc_spec = irr_part
        self.meta = Meta(
            btype=btype,
            image_spec=None,
            dc_irr_spec=dc_spec,
            lp_irr=True,
            injective=True,
        )

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.engine.eval(_rat_elem(rat(q)), fuel)

    # -- engine structure (cut-owner protocol) --------------------------

    def carrier_element_of(self, w: Fraction, fuel: int = DEFAULT_FUEL):
        return self.engine.eval_inv(w, fuel)

    def memo_pairs(self):
        return self.engine.memo.pairs

    def advance(self, steps: int):
        self.engine.advance_to_stage(self.engine.stage + min(4 * steps, 256))

    # -- exact order structure -------------------------------------------

    def value_cut(self, at, side: int, fuel: int = DEFAULT_FUEL) -> Union[Cut, ExtReal]:
        """sup of values below ``at`` (side<0) / inf above (side>0).

        ``at`` is a position on the argument line: a rational, an exact
        irrational, or a comparable cut.
        """
        if isinstance(at, (int, Fraction)):
            at = ExtReal.from_rat(at)
        if isinstance(at, ExtReal):
            if at.inf == -1:
                return self.inf_image()
            if at.inf == 1:
                return self.sup_image()
            tag = Tagged(0, at)
            if at.is_rational or self._irr_member(at):
                return TargetCut(self, ColumnEdge(tag, plus=side > 0))
            return TargetCut(self, FirstGap(at))
        return TargetCut(self, FirstGap(at))

    def _irr_member(self, p: ExtReal) -> bool:
        if self.irr_part is None:
            return False
        return self.irr_part.member(p)

    def inf_image(self):
        if self.meta.btype.below:
            return TargetCut(self, ColumnEdge(LO_TAG, plus=True))
        return NEG_INF

    def sup_image(self):
        if self.meta.btype.above:
            return TargetCut(self, ColumnEdge(HI_TAG, plus=False))
        return POS_INF

    def jump_gap(self, at, fuel: int = DEFAULT_FUEL):
        """(sup below, inf above) around a jump position."""
        return self.value_cut(at, -1, fuel), self.value_cut(at, +1, fuel)

    def gen_inverse(self, y, fuel: int = DEFAULT_FUEL):
        first = self.carrier_element_of(rat(y), fuel)[0]
        if first.kind == -1:
            return ("defined", NEG_INF)
        if first.kind == 1:
            return ("defined", POS_INF)
        return ("defined", first.point)

    def dagger_rat(self, y, fuel: int = DEFAULT_FUEL) -> Fraction:
        first = self.carrier_element_of(rat(y), fuel)[0]
        if first.kind != 0 or not first.point.is_rational:
            raise ValueError("preimage column is not rational")
        return first.point.as_rat()


def generic_injection() -> EngineInjective:
    return EngineInjective(None, UU, "generic_injection")


def injective_with_dc(points: Union[Iterable[ExtReal], D0Family], btype: Btype) -> EngineInjective:
    if isinstance(points, D0Family):
        return EngineInjective(points, btype, "sparse_injection")
    pts = tuple(points)
    if not pts:
        kind = "generic_injection" if btype == UU else "injective_with_dc"
        return EngineInjective(None, btype, kind)
    return EngineInjective(FiniteIrrationals(pts), btype, "injective_with_dc")


def sparse_injection(btype: Btype) -> EngineInjective:
    return EngineInjective(D0Family(), btype, "sparse_injection")


class LeftInverseFn(MonoFn):
    """The left inverse of a generic injection: reads off the preimage
    column of each rational (a rational, by genericity)."""

    tier = "lazy"

    def __init__(self, g: EngineInjective):
        if g.kind != "generic_injection":
            raise ValueError("left inverse requires a generic injection")
        self.g = g
        self.meta = Meta(btype=UU, surjective_onto_spec=True, image_spec=RatSet.all_q())

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.g.dagger_rat(rat(q), fuel)


class GenericSurjectionFn(MonoFn):
    """pr1 . alpha with alpha: Q -> A x Q the canonical isomorphism."""

    tier = "lazy"

    def __init__(self, carrier: RatSet):
        if not carrier.is_infinite():
            raise ValueError("carrier must be infinite")
        self.carrier = carrier
        self.factor = OfRatSet(carrier)
        self.product = FiberFirstProduct(self.factor)
        self.engine = LazyIso(ProductTargetIso(ALL_Q, self.product, strict=True))
        self.meta = Meta(
            btype=Btype(carrier.bounded_below(), carrier.bounded_above()),
            image_spec=carrier,
            dc_irr_spec=None,
            lp_irr=None,
            injective=False,
            surjective_onto_spec=True,
        )

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.engine.eval(rat(q), fuel)[0]

    def fiber_elem(self, w, k, fuel: int = DEFAULT_FUEL) -> Fraction:
        """The fiber point of w at internal coordinate k."""
        return self.engine.eval_inv((rat(w), rat(k)), fuel)

    # -- cut-owner protocol (cuts on the argument line) -------------------

    def carrier_image_of(self, q: Fraction, fuel: int = DEFAULT_FUEL):
        return self.engine.eval(q, fuel=fuel)

    def memo_pairs(self):
        return self.engine.memo.pairs

    def advance(self, steps: int):
        self.engine.advance_to_stage(self.engine.stage + min(4 * steps, 256))

    def fiber_lo(self, w) -> SourceCut:
        return SourceCut(self, ColumnEdge(rat(w), plus=False))

    def fiber_hi(self, w) -> SourceCut:
        return SourceCut(self, ColumnEdge(rat(w), plus=True))

    def gen_inverse(self, y, fuel: int = DEFAULT_FUEL):
        y = rat(y)
        if not self.carrier.member(y):
            # the fiber is empty; both one-sided cuts agree at the gap
            lo = SourceCut(self, FirstGap(ExtReal.from_rat(y)))
            return ("defined", lo)
        return ("undefined", self.fiber_lo(y), self.fiber_hi(y))


def generic_surjection(carrier: RatSet) -> GenericSurjectionFn:
    return GenericSurjectionFn(carrier)


def left_inverse_generic_injection(g: EngineInjective) -> LeftInverseFn:
    return LeftInverseFn(g)


# ---------------------------------------------------------------------------
# Lifts through a map with fat fibers
# ---------------------------------------------------------------------------


class _FiberScan:
    """Candidate targets inside the f-fiber of a value, in canonical order."""

    def __init__(self, f: MonoFn):
        self.f = f

    def candidates(self, w: Fraction, fuel: int):
        if isinstance(self.f, GenericSurjectionFn):
            k = 0
            while True:
                yield self.f.fiber_elem(w, ALL_Q.nth(k), fuel)
                k += 1
        elif isinstance(self.f, ExplicitFn):
            fiber = self.f.level_set(w)
            if fiber.is_empty():
                return
            k = 0
            while True:
                q = ALL_Q.nth(k)
                if fiber.contains(q):
                    yield q
                k += 1
        else:
            raise TypeError("lift target must be explicit or a generic surjection")


class _LiftSystem(ExtensionSystem):
    """Forth system of partial maps m with s = f.m pointwise."""

    def __init__(self, f: MonoFn, s: MonoFn, strict: bool, fuel: int):
        super().__init__(ALL_Q, ALL_Q, strict=strict, back_enabled=False)
        self.f = f
        self.s = s
        self.scan = _FiberScan(f)
        self.fuel = fuel

    def forth_pick(self, m: PartialMap, x):
        w = self.s.eval(x, self.fuel)
        lo, hi = self.forth_window(m, x)
        for i, y in enumerate(self.scan.candidates(w, self.fuel)):
            if i > 10_000:
                break
            if lo is not None and not (lo < y or (not self.strict and lo == y)):
                continue
            if hi is not None and not (y < hi or (not self.strict and y == hi)):
                continue
            if self.strict and m.has_target(y):
                continue
            return y
        raise NoAdmissibleTarget(f"no fiber placement over {x}")


class LiftThroughFn(MonoFn):
    """s' with s = f . s', extending a seed, fiber placements minimal-index."""

    tier = "lazy"

    def __init__(self, f: MonoFn, s: MonoFn, seed: Optional[PartialMap] = None, strict: bool = False, fuel: int = DEFAULT_FUEL):
        _check_image_contained(f, s, fuel)
        m0 = seed if seed is not None else PartialMap(strict=strict)
        if m0.strict != strict:
            m0 = PartialMap(m0.pairs, strict=strict)
        for p, y in m0.pairs:
            if f.eval(y, fuel) != s.eval(p, fuel):
                raise SeedInconsistent(f"seed {p}->{y} does not lift s")
        self.f, self.s = f, s
        self.engine = LazyIso(_LiftSystem(f, s, strict, fuel), seed=m0)
        self.meta = Meta(btype=None, injective=strict)

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        return self.engine.eval(rat(q), fuel)


def _check_image_contained(f: MonoFn, s: MonoFn, fuel: int):
    f_img = f.meta.image_spec
    s_img = s.meta.image_spec
    if f_img is None:
        raise ImageNotContained("no image information for the outer map")
    if isinstance(f_img, RatSet) and not f_img.intervals and not f_img.added:
        raise ImageNotContained("outer image empty")
    if isinstance(s_img, RatSet) and isinstance(f_img, RatSet):
        if not s_img.subset_of(f_img):
            raise ImageNotContained(f"{s_img} not within {f_img}")
        return
    # fall back to spot checks on an enumeration prefix
    for n in range(32):
        w = s.eval(ALL_Q.nth(n), fuel)
        ok = f_img.member(w)
        if ok is False:
            raise ImageNotContained(f"value {w} outside the outer image")


def lift_through(f: MonoFn, s: MonoFn, seed=None, strict: bool = False) -> LiftThroughFn:
    if seed is not None and not isinstance(seed, PartialMap):
        seed = PartialMap(sorted((rat(a), rat(b)) for a, b in dict(seed).items()), strict=strict)
    return LiftThroughFn(f, s, seed, strict)


# ---------------------------------------------------------------------------
# Precise lift: fiberwise continuous, exhausting every open fiber end
# ---------------------------------------------------------------------------


def _approach(endpoint: ExtReal, n: int, from_below: bool) -> Fraction:
    """n-th rational marching toward an endpoint (unit steps when infinite)."""
    if endpoint.inf != 0:
        raise ValueError("use explicit stepping for infinite ends")
    if endpoint.is_rational:
        e = endpoint.as_rat()
        return e - Fraction(1, 2**n) if from_below else e + Fraction(1, 2**n)
    fl = endpoint.scale(2**n).floor()
    return Fraction(fl, 2**n) if from_below else Fraction(fl + 1, 2**n)


_prefix_max: list = []
_prefix_min: list = []


def prefix_extreme(n: int, upward: bool) -> Fraction:
    """Extreme of the first n+1 canonical rationals.

    Weakly monotone and cofinal in the chosen direction while staying at
    enumeration index <= n: the cheap ladder coordinates for walking a
    fiber toward an open end (consecutive repeats yield flat pieces).
    """
    cache = _prefix_max if upward else _prefix_min
    while len(cache) <= n:
        q = ALL_Q.nth(len(cache))
        if cache:
            q = max(cache[-1], q) if upward else min(cache[-1], q)
        cache.append(q)
    return cache[n]


class PreciseLiftFn(MonoFn):
    """s' with s = f.s', continuous on each fiber of s and exhausting the
    matching f-fiber wherever the s-fiber has no extreme element."""

    tier = "lazy"

    def __init__(self, f: GenericSurjectionFn, s: ExplicitFn, fuel: int = DEFAULT_FUEL):
        if not isinstance(f, GenericSurjectionFn):
            raise ImageSpecMismatch("outer map must be a generic surjection")
        if not isinstance(s, ExplicitFn) or s.periodic is not None:
            raise ImageSpecMismatch("inner map must be a finite-block explicit function")
        expected = _padded_image(s)
        if not (expected.subset_of(f.carrier) and f.carrier.subset_of(expected)):
            raise ImageSpecMismatch(f"outer image {f.carrier} != padded inner image {expected}")
        self.f, self.s = f, s
        self.fuel = fuel
        self.meta = Meta(btype=UU, injective=False)

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        q = rat(q)
        w = self.s.eval(q, fuel)
        fiber = self.s.level_set(w)
        return self._place(q, w, fiber, fuel)

    def _fib(self, w: Fraction, k: Fraction, fuel: int) -> Fraction:
        return self.f.fiber_elem(w, k, fuel)

    def _place(self, q: Fraction, w: Fraction, fiber: Interval, fuel: int) -> Fraction:
        lo_cl, hi_cl = fiber.lo_closed, fiber.hi_closed
        if lo_cl and hi_cl:
            a, b = fiber.lo.as_rat(), fiber.hi.as_rat()
            if a == b:
                return self._fib(w, Fraction(0), fuel)
            y0, y1 = self._fib(w, Fraction(0), fuel), self._fib(w, Fraction(1), fuel)
            return y0 + (q - a) * (y1 - y0) / (b - a)
        if lo_cl:
            return self._ladder_place(q, w, anchor=fiber.lo.as_rat(), end=fiber.hi, upward=True, fuel=fuel)
        if hi_cl:
            return self._ladder_place(q, w, anchor=fiber.hi.as_rat(), end=fiber.lo, upward=False, fuel=fuel)
        anchor = fiber.some_rational()
        if q == anchor:
            return self._fib(w, Fraction(0), fuel)
        upward = q > anchor
        return self._ladder_place(q, w, anchor=anchor, end=fiber.hi if upward else fiber.lo, upward=upward, fuel=fuel)

    def _ladder_place(self, q, w, anchor: Fraction, end: ExtReal, upward: bool, fuel: int) -> Fraction:
        """Affine pieces between ladder rationals and record fiber points."""
        prev_s = anchor
        prev_t = self._fib(w, prefix_extreme(0, upward), fuel)
        if q == anchor:
            return prev_t
        n = 0
        while True:
            n += 1
            if n > 4000:
                raise RuntimeError("fiber ladder failed to reach query")
            if end.inf != 0:
                cur_s = prev_s + n if upward else prev_s - n
            else:
                cand = _approach(end, n, from_below=upward)
                if (cand <= prev_s) if upward else (cand >= prev_s):
                    continue
                cur_s = cand
            cur_t = self._fib(w, prefix_extreme(n, upward), fuel)
            inside = (prev_s <= q <= cur_s) if upward else (cur_s <= q <= prev_s)
            if inside:
                return prev_t + (q - prev_s) * (cur_t - prev_t) / (cur_s - prev_s)
            prev_s, prev_t = cur_s, cur_t


def _padded_image(s: ExplicitFn) -> RatSet:
    """(-inf, inf s) + Img(s) + (sup s, +inf) as a single rational set."""
    img = s.image_spec()
    assert isinstance(img, RatSet)
    pads = []
    lb = img.lower_bound()
    ub = img.upper_bound()
    if lb is not None and lb.is_finite:
        pads.append(Interval(NEG_INF, lb, False, False))
    if ub is not None and ub.is_finite:
        pads.append(Interval(ub, POS_INF, False, False))
    return RatSet.build(list(img.intervals) + pads, added=img.added, removed=img.removed)


def precise_lift(f: GenericSurjectionFn, s: ExplicitFn) -> PreciseLiftFn:
    return PreciseLiftFn(f, s)


# ---------------------------------------------------------------------------
# Saturating maps: every prescribed target keeps a preimage inside a pool
# ---------------------------------------------------------------------------


class _SaturatingSystem(ExtensionSystem):
    """Weakly increasing maps satisfying the two-sided density condition:
    whenever a prescribed target can fall between two placed values, the
    pool is dense between the corresponding arguments."""

    def __init__(self, pool: RatSet, targets: RatSet, work: Interval):
        carrier = OfRatSet(RatSet.build([work]))
        super().__init__(carrier, carrier, strict=False)
        self.pool = pool
        self.work = work
        self.ac_pool = (
            lambda x: pool.member(x) and work.contains(x),
            OfRatSet(_restrict(targets, work)),
        )

    def _dense(self, lo, hi) -> bool:
        lo_e = ExtReal.from_rat(lo) if lo is not None else NEG_INF
        hi_e = ExtReal.from_rat(hi) if hi is not None else POS_INF
        return self.pool.count_in_interval(Interval(lo_e, hi_e), cap=2) >= 2

    def forth_pick(self, m: PartialMap, x):
        below, above = m.source_bracket(x)
        u_lo = below[0] if below else None
        u_hi = above[0] if above else None
        left_dense = self._dense(u_lo, x)
        right_dense = self._dense(x, u_hi)
        if left_dense and not right_dense and above is not None:
            return above[1]
        if right_dense and not left_dense and below is not None:
            return below[1]
        lo = below[1] if below else None
        hi = above[1] if above else None
        for k in range(self.scan_limit()):
            y = self.source_enum.nth(k)
            if lo is not None and not lo <= y:
                continue
            if hi is not None and not y <= hi:
                continue
            return y
        raise NoAdmissibleTarget(f"no value for {x}")

    def ac_back_pick(self, m: PartialMap, y):
        below, above = m.target_bracket(y)
        u_lo = below[0] if below else None
        u_hi = above[0] if above else None
        member, _ = self.ac_pool
        for k in range(self.scan_limit()):
            try:
                p = self.source_enum.nth(k)
            except IndexOutOfRange:
                break
            if not member(p) or p in m:
                continue
            if u_lo is not None and not u_lo < p:
                continue
            if u_hi is not None and not p < u_hi:
                continue
            if self._dense(u_lo, p) and self._dense(p, u_hi):
                return p
        raise NoAdmissibleSource(f"pool exhausted for {y}")


def _restrict(targets: RatSet, work: Interval) -> RatSet:
    ivs = [iv.intersect(work) for iv in targets.intervals]
    return RatSet.build(ivs, added=[q for q in targets.added if work.contains(q)], removed=targets.removed)


class SaturatingFn(MonoFn):
    """The identity outside the working interval; inside, a canonical
    weakly increasing map fixing the seeds whose fibers over every
    prescribed target meet the pool."""

    tier = "lazy"

    def __init__(self, pool: RatSet, targets: RatSet, anchors: Sequence, fuel: int = DEFAULT_FUEL):
        zs = sorted(rat(z) for z in anchors)
        zs = _pad_anchors(pool, zs)
        _check_plus(pool, targets, zs)
        lo = ExtReal.from_rat(zs[0]) if pool.bounded_below() else NEG_INF
        hi = ExtReal.from_rat(zs[-1]) if pool.bounded_above() else POS_INF
        work = Interval(lo, hi, lo.is_finite, hi.is_finite)
        self.work = work
        seed = PartialMap([(z, z) for z in zs if work.contains(z)], strict=False)
        self.engine = LazyIso(_SaturatingSystem(pool, targets, work), seed=seed)
        self.anchors = tuple(zs)
        self.meta = Meta(btype=UU, surjective_onto_spec=False)

    def eval(self, q, fuel: int = DEFAULT_FUEL) -> Fraction:
        q = rat(q)
        if not self.work.contains(q):
            return q
        return self.engine.eval(q, fuel)

    def pool_preimage(self, y, fuel: int = DEFAULT_FUEL) -> Fraction:
        """A preimage of y inside the pool (y a prescribed target)."""
        y = rat(y)
        member, c_enum = self.engine.system.ac_pool
        self.engine.run_until(
            lambda: any(t == y and member(s) for s, t in self.engine.memo.pairs), fuel
        )
        for s, t in self.engine.memo.pairs:
            if t == y and member(s):
                return s
        raise RuntimeError("unreachable")


def _pad_anchors(pool: RatSet, zs: list) -> list:
    lb, ub = pool.lower_bound(), pool.upper_bound()
    if pool.bounded_below() and (not zs or ExtReal.from_rat(zs[0]).cmp(lb) >= 0):
        zs = [Fraction(lb.floor() - 1)] + zs
    if pool.bounded_above() and (not zs or ExtReal.from_rat(zs[-1]).cmp(ub) <= 0):
        zs = zs + [Fraction(ub.floor() + 1)]
    return zs


def _check_plus(pool: RatSet, targets: RatSet, zs: list):
    for z1, z2 in zip(zs, zs[1:]):
        gap = Interval.open(z1, z2)
        n = pool.count_in_interval(gap, cap=2)
        if n == 1:
            raise PlusConditionViolated(f"a single pool point between {z1} and {z2}")
        if n == 0 and targets.count_in_interval(gap, cap=1) > 0:
            raise PlusConditionViolated(f"targets between {z1} and {z2} but no pool there")


def saturating_map(pool: RatSet, targets: RatSet, anchors: Sequence = ()) -> SaturatingFn:
    return SaturatingFn(pool, targets, anchors)

"""Symbolic real points: non-realized cuts of lazily built order isomorphisms.

The lazy constructions put their irrational structure exactly at the
order-theoretic gaps of their product carriers.  Such a gap is a
downward-closed set without a greatest element whose complement has no
least element; its image under the built isomorphism is a single real
number that is provably not a value of the map.  Cuts of this kind are
compared against rationals exactly, by locating the rational's carrier
element and testing which side of the gap it lies on; cuts over the
same engine compare exactly through their descriptors.  Only unrelated
cuts fall back to bracket refinement, which is fuel-bounded and
surfaces as Undecided rather than a wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from .backforth import DEFAULT_FUEL
from .enumeration import Tagged
from .exactnum import ExtReal, rat


class Undecided(Exception):
    """A comparison between unrelated symbolic points ran out of fuel."""


# ---------------------------------------------------------------------------
# Gap descriptors over a product carrier (factor x Q, lexicographic)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnEdge:
    """The gap just below (plus=False) or just above (plus=True) a column."""

    column: Tagged
    plus: bool

    def contains(self, m: tuple, fuel: int = DEFAULT_FUEL) -> bool:
        first = m[0]
        if first == self.column:
            return self.plus
        return first < self.column


@dataclass(frozen=True)
class FirstGap:
    """The gap at a first-coordinate position that is not a column.

    The position may be an exact point or another comparable cut; either
    way it never coincides with a column, so membership is decided by a
    strict comparison of first coordinates.
    """

    position: object  # ExtReal or a cut

    def contains(self, m: tuple, fuel: int = DEFAULT_FUEL) -> bool:
        first = m[0]
        if isinstance(first, Tagged):
            if first.kind != 0:
                return first.kind == -1
            first_pt = first.point
        else:
            first_pt = ExtReal.from_rat(first)
        return real_cmp(first_pt, self.position, fuel) < 0


@dataclass(frozen=True)
class InColumn:
    """The gap inside a column at an irrational second-coordinate position."""

    column: Tagged
    position2: ExtReal  # irrational, so k != position2 for rational k

    def contains(self, m: tuple, fuel: int = DEFAULT_FUEL) -> bool:
        first = m[0]
        if first == self.column:
            return ExtReal.from_rat(m[1]).cmp(self.position2) < 0
        return first < self.column


GapDescr = Union[ColumnEdge, FirstGap, InColumn]


def _descr_key(d: GapDescr):
    """Sort key pieces: (first-coordinate anchor, refinement rank)."""
    if isinstance(d, ColumnEdge):
        return d.column, (1 if d.plus else -1), None
    if isinstance(d, InColumn):
        return d.column, 0, d.position2
    return d.position, 0, None


def descr_cmp(d1: GapDescr, d2: GapDescr, fuel: int = DEFAULT_FUEL) -> int:
    """Exact order of two gaps of the same carrier."""
    a1, r1, p1 = _descr_key(d1)
    a2, r2, p2 = _descr_key(d2)
    c = _anchor_cmp(a1, a2, fuel)
    if c != 0:
        return c
    if r1 != r2:
        return -1 if r1 < r2 else 1
    if p1 is not None and p2 is not None:
        return p1.cmp(p2)
    return 0


def _anchor_cmp(a1, a2, fuel: int) -> int:
    if isinstance(a1, Tagged) and isinstance(a2, Tagged):
        if a1 == a2:
            return 0
        return -1 if a1 < a2 else 1
    if isinstance(a1, Tagged) and a1.kind != 0:
        return a1.kind
    if isinstance(a2, Tagged) and a2.kind != 0:
        return -a2.kind
    p1 = a1.point if isinstance(a1, Tagged) else _as_point(a1)
    p2 = a2.point if isinstance(a2, Tagged) else _as_point(a2)
    return real_cmp(p1, p2, fuel)


def _as_point(a):
    if isinstance(a, (int, Fraction)):
        return ExtReal.from_rat(a)
    return a


# ---------------------------------------------------------------------------
# Cut values
# ---------------------------------------------------------------------------


class Cut:
    """Base: a symbolic real with exact rational comparison."""

    def cmp_rat(self, w: Fraction, fuel: int = DEFAULT_FUEL) -> int:
        """Sign of (self - w); never 0 for genuinely irrational cuts."""
        raise NotImplementedError

    def refine_bracket(self, steps: int, fuel: int = DEFAULT_FUEL) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        """Rational bounds (lo, hi) with lo < self < hi; sides may be None."""
        raise NotImplementedError

    # ordering sugar against anything comparable
    def __lt__(self, other):
        return real_cmp(self, other) < 0

    def __le__(self, other):
        return real_cmp(self, other) <= 0

    def __gt__(self, other):
        return real_cmp(self, other) > 0

    def __ge__(self, other):
        return real_cmp(self, other) >= 0


@dataclass(frozen=True)
class TargetCut(Cut):
    """sup of the engine image over a gap: a point on the value line of a
    factor-product-to-Q isomorphism."""

    owner: object  # exposes carrier_element_of(w, fuel) and memo_pairs()
    descr: GapDescr

    def cmp_rat(self, w: Fraction, fuel: int = DEFAULT_FUEL) -> int:
        m = self.owner.carrier_element_of(w, fuel)
        return 1 if self.descr.contains(m, fuel) else -1

    def refine_bracket(self, steps: int, fuel: int = DEFAULT_FUEL):
        lo = hi = None
        self.owner.advance(steps)
        for m, w in self.owner.memo_pairs():
            if self.descr.contains(m, fuel):
                if lo is None or w > lo:
                    lo = w
            elif hi is None or w < hi:
                hi = w
        return lo, hi

    def __repr__(self):
        return f"TargetCut({self.descr})"


@dataclass(frozen=True)
class SourceCut(Cut):
    """sup of the source rationals mapped into a gap: a point on the
    argument line of a Q-to-factor-product isomorphism."""

    owner: object  # exposes carrier_image_of(q, fuel) and memo_pairs()
    descr: GapDescr

    def cmp_rat(self, w: Fraction, fuel: int = DEFAULT_FUEL) -> int:
        m = self.owner.carrier_image_of(w, fuel)
        return 1 if self.descr.contains(m, fuel) else -1

    def refine_bracket(self, steps: int, fuel: int = DEFAULT_FUEL):
        lo = hi = None
        self.owner.advance(steps)
        for q, m in self.owner.memo_pairs():
            if self.descr.contains(m, fuel):
                if lo is None or q > lo:
                    lo = q
            elif hi is None or q < hi:
                hi = q
        return lo, hi

    def __repr__(self):
        return f"SourceCut({self.descr})"


@dataclass(frozen=True)
class MappedCut(Cut):
    """The image of a cut under the closure of an automorphism of Q.

    The owner is a two-sorted engine exposing exact inverse lookups:
    rationals have rational preimages, and distinguished irrational
    targets have engine-point preimages.
    """

    owner: object  # exposes inv_rat(w, fuel), inv_irr(point, fuel)
    base: object  # the source-side position: ExtReal or Cut

    def cmp_rat(self, w: Fraction, fuel: int = DEFAULT_FUEL) -> int:
        u = self.owner.inv_rat(w, fuel)
        return real_cmp(self.base, ExtReal.from_rat(u), fuel)

    def cmp_point(self, e: ExtReal, fuel: int = DEFAULT_FUEL) -> Optional[int]:
        if self.owner.is_irr_target(e):
            delta = self.owner.inv_irr(e, fuel)
            return real_cmp(self.base, delta, fuel)
        return None

    def refine_bracket(self, steps: int, fuel: int = DEFAULT_FUEL):
        lo, hi = _bracket(self.base, steps, fuel)
        lo2 = self.owner.fwd_rat(lo, fuel) if lo is not None else None
        hi2 = self.owner.fwd_rat(hi, fuel) if hi is not None else None
        return lo2, hi2

    def __repr__(self):
        return f"MappedCut({self.base})"


PointLike = Union[ExtReal, Cut]


def _bracket(x: PointLike, steps: int, fuel: int) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    if isinstance(x, ExtReal):
        if x.inf != 0:
            return None, None
        if x.is_rational:
            return x.a - Fraction(1, 2**steps), x.a + Fraction(1, 2**steps)
        fl = x.scale(2**steps).floor()
        return Fraction(fl, 2**steps), Fraction(fl + 1, 2**steps)
    return x.refine_bracket(steps, fuel)


def real_cmp(x: PointLike, y: PointLike, fuel: int = DEFAULT_FUEL) -> int:
    """Exact three-way comparison of symbolic reals.

    Same-engine cuts and cut-vs-rational comparisons are decided
    structurally; unrelated pairs fall back to bracket refinement and
    raise Undecided when the fuel runs out before the brackets separate.
    """
    if isinstance(x, (int, Fraction)):
        x = ExtReal.from_rat(x)
    if isinstance(y, (int, Fraction)):
        y = ExtReal.from_rat(y)
    if isinstance(x, ExtReal) and isinstance(y, ExtReal):
        return x.cmp(y)
    if isinstance(x, ExtReal):
        return -real_cmp(y, x, fuel)
    # x is a Cut
    if isinstance(y, ExtReal):
        if y.is_rational:
            return x.cmp_rat(y.a, fuel)
        if y.inf != 0:
            return -y.inf
        if isinstance(x, MappedCut):
            c = x.cmp_point(y, fuel)
            if c is not None:
                return c
        return _bracket_cmp(x, y, fuel)
    # both cuts
    if isinstance(x, TargetCut) and isinstance(y, TargetCut) and x.owner is y.owner:
        return descr_cmp(x.descr, y.descr, fuel)
    if isinstance(x, SourceCut) and isinstance(y, SourceCut) and x.owner is y.owner:
        return descr_cmp(x.descr, y.descr, fuel)
    if isinstance(x, MappedCut) and isinstance(y, MappedCut) and x.owner is y.owner:
        return real_cmp(x.base, y.base, fuel)
    return _bracket_cmp(x, y, fuel)


def _bracket_cmp(x: PointLike, y: PointLike, fuel: int) -> int:
    for steps in range(2, 40):
        if (steps - 1) * 64 > fuel:
            break
        xlo, xhi = _bracket(x, steps, fuel)
        ylo, yhi = _bracket(y, steps, fuel)
        if xhi is not None and ylo is not None and xhi <= ylo:
            return -1
        if yhi is not None and xlo is not None and yhi <= xlo:
            return 1
    raise Undecided(f"{x} vs {y}")

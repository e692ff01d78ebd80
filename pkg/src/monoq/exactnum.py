"""Exact point arithmetic over Q(sqrt 2) extended with +/-infinity.

Every boundary point handled by this package lives here: rationals,
irrationals of the form a + b*sqrt(2), and the two infinities.  All
comparisons are decided exactly by integer arithmetic (no floats).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

Rat = Fraction

RatLike = Union[Fraction, int, str]


def rat(value: RatLike) -> Fraction:
    """Coerce ints and 'p/q' strings to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(value)


def _sqrt2_sign(a: Fraction, b: Fraction) -> int:
    """Exact sign of a + b*sqrt(2), via squaring when signs are mixed."""
    if b == 0:
        return -1 if a < 0 else (0 if a == 0 else 1)
    if a == 0:
        return -1 if b < 0 else 1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # Mixed signs: a + b*sqrt(2) > 0  <=>  a^2 ? 2 b^2 depending on which is positive.
    if a > 0:  # b < 0
        return 1 if a * a > 2 * b * b else -1
    return 1 if 2 * b * b > a * a else -1  # a < 0, b > 0; never equal (sqrt2 irrational)


@dataclass(frozen=True, order=False)
class ExtReal:
    """A point a + b*sqrt(2), or an infinity when ``inf`` is -1/+1.

    a and b are kept as Fractions (lowest terms, positive denominator
    by construction of Fraction); for infinities both are zero.
    """

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    inf: int = 0

    def __post_init__(self):
        if self.inf not in (-1, 0, 1):
            raise ValueError("inf flag must be -1, 0 or +1")
        if self.inf != 0 and (self.a != 0 or self.b != 0):
            raise ValueError("infinite points carry no finite part")

    # -- constructors ------------------------------------------------

    @classmethod
    def from_rat(cls, q: RatLike) -> "ExtReal":
        return cls(rat(q), Fraction(0))

    @classmethod
    def sqrt2(cls, coeff: RatLike = 1, plus: RatLike = 0) -> "ExtReal":
        """The point plus + coeff*sqrt(2)."""
        return cls(rat(plus), rat(coeff))

    # -- classification ----------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.inf == 0

    @property
    def is_rational(self) -> bool:
        return self.inf == 0 and self.b == 0

    @property
    def is_irrational(self) -> bool:
        return self.inf == 0 and self.b != 0

    def as_rat(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.a

    # -- order -------------------------------------------------------

    def cmp(self, other: "ExtReal") -> int:
        if self.inf != 0 or other.inf != 0:
            if self.inf == other.inf:
                return 0
            return -1 if self.inf < other.inf else 1
        if self.b == other.b:  # common case: both rational
            if self.a == other.a:
                return 0
            return -1 if self.a < other.a else 1
        return _sqrt2_sign(self.a - other.a, self.b - other.b)

    def __lt__(self, other):
        return self.cmp(_coerce(other)) < 0

    def __le__(self, other):
        return self.cmp(_coerce(other)) <= 0

    def __gt__(self, other):
        return self.cmp(_coerce(other)) > 0

    def __ge__(self, other):
        return self.cmp(_coerce(other)) >= 0

    # -- arithmetic (closed over the field part; infinities only for
    #    negation and rational shifts that keep them infinite) -------

    def __neg__(self) -> "ExtReal":
        if self.inf != 0:
            return ExtReal(inf=-self.inf)
        return ExtReal(-self.a, -self.b)

    def __add__(self, other) -> "ExtReal":
        other = _coerce(other)
        if self.inf != 0:
            if other.inf == -self.inf:
                raise ValueError("inf - inf is undefined")
            return self
        if other.inf != 0:
            return other
        return ExtReal(self.a + other.a, self.b + other.b)

    def __sub__(self, other) -> "ExtReal":
        return self + (-_coerce(other))

    def scale(self, c: RatLike) -> "ExtReal":
        """Multiply by a nonzero rational."""
        c = rat(c)
        if c == 0:
            raise ValueError("scale factor must be nonzero")
        if self.inf != 0:
            return ExtReal(inf=self.inf if c > 0 else -self.inf)
        return ExtReal(self.a * c, self.b * c)

    def recip(self) -> "ExtReal":
        """Reciprocal of a finite nonzero point: 1/(a+b*sqrt2) stays in the field."""
        if self.inf != 0:
            raise ValueError("reciprocal of infinity")
        d = self.a * self.a - 2 * self.b * self.b
        if d == 0:
            raise ValueError("reciprocal of zero")
        return ExtReal(self.a / d, -self.b / d)

    def approx(self) -> float:
        """Float approximation (for prefilters only, never for decisions)."""
        if self.inf != 0:
            return float("inf") * self.inf
        return self.a.numerator / self.a.denominator + (
            self.b.numerator / self.b.denominator
        ) * 1.4142135623730951

    def floor(self) -> int:
        """Exact floor of a finite point."""
        if self.inf != 0:
            raise ValueError("floor of infinity")
        if self.b == 0:
            return math.floor(self.a)
        # Common denominator: (n + m*sqrt2)/d  with d > 0.
        d = self.a.denominator * self.b.denominator
        n = self.a.numerator * self.b.denominator
        m = self.b.numerator * self.a.denominator
        # floor(m*sqrt2) guess via integer sqrt, then local exact correction.
        t = 2 * m * m
        r = math.isqrt(t)
        k = (n + (r if m >= 0 else -r - 1)) // d
        while self.cmp(ExtReal.from_rat(k)) < 0:
            k -= 1
        while self.cmp(ExtReal.from_rat(k + 1)) >= 0:
            k += 1
        return k

    # -- display -----------------------------------------------------

    def __str__(self) -> str:
        if self.inf == 1:
            return "inf"
        if self.inf == -1:
            return "-inf"
        if self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*s2"

    __repr__ = __str__


def _coerce(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, (int, Fraction)):
        return ExtReal.from_rat(x)
    raise TypeError(f"cannot interpret {x!r} as ExtReal")


NEG_INF = ExtReal(inf=-1)
POS_INF = ExtReal(inf=1)
ZERO = ExtReal.from_rat(0)
SQRT2 = ExtReal.sqrt2()


def parse_extreal(text: str) -> ExtReal:
    """Parse 'inf', '-inf', 'p/q' or 'a+b*s2' (a, b rationals)."""
    text = text.strip()
    if text == "inf":
        return POS_INF
    if text == "-inf":
        return NEG_INF
    if "s2" in text:
        head, _, _ = text.partition("*s2")
        # split the b part off the last '+' or interior '-'
        for i in range(len(head) - 1, 0, -1):
            if head[i] == "+" or (head[i] == "-" and head[i - 1] not in "+-/"):
                sign = 1 if head[i] == "+" else -1
                return ExtReal(rat(head[:i]), rat(head[i + 1 :]) * sign)
        return ExtReal(Fraction(0), rat(head))
    return ExtReal.from_rat(text)


def cmp(x: ExtReal, y: ExtReal) -> int:
    """Three-way order of two extended points: -1, 0 or +1."""
    return x.cmp(y)


def simplest_rational_between(
    lo: ExtReal, hi: ExtReal, lo_strict: bool = True, hi_strict: bool = True
) -> Fraction:
    """Stern-Brocot walk to the simplest rational in the given interval.

    Endpoints may be infinite or irrational; the interval must contain
    at least one rational (always true when lo < hi as reals).
    """
    if lo.cmp(hi) > 0 or (lo.cmp(hi) == 0 and (lo_strict or hi_strict or not lo.is_rational)):
        raise ValueError(f"empty interval ({lo}, {hi})")

    def walk(lo: ExtReal, hi: ExtReal, lo_strict: bool, hi_strict: bool) -> Fraction:
        def low(q):
            c = ExtReal.from_rat(q).cmp(lo)
            return c < 0 or (c == 0 and lo_strict)

        def high(q):
            c = ExtReal.from_rat(q).cmp(hi)
            return c > 0 or (c == 0 and hi_strict)

        # Prefer an integer; the admissible ones form a contiguous range.
        if not low(0) and not high(0):
            return Fraction(0)
        if low(0):
            n = lo.floor()  # lo is finite here (0 was too low)
            while low(n):
                n += 1
            if not high(n):
                return Fraction(n)
            m = n - 1  # whole interval inside (m, m+1)
        else:
            n = hi.floor() + 1  # hi is finite here (0 was too high)
            while high(n):
                n -= 1
            if not low(n):
                return Fraction(n)
            m = n  # whole interval inside (m, m+1)
        # Continued-fraction descent: x = m + 1/t with t in the flipped interval.
        shifted_lo = lo - ExtReal.from_rat(m)
        shifted_hi = hi - ExtReal.from_rat(m)
        new_lo = shifted_hi.recip() if shifted_hi.is_finite else ExtReal.from_rat(0)
        new_hi = shifted_lo.recip() if shifted_lo.cmp(ZERO) != 0 else POS_INF
        t = walk(new_lo, new_hi, hi_strict, lo_strict)
        return m + 1 / t

    return walk(lo, hi, lo_strict, hi_strict)


def mediant_brackets(alpha: ExtReal, width: Fraction) -> Tuple[Fraction, Fraction]:
    """Rationals u < alpha < v with v - u <= width, by a mediant walk.

    The walk produces best-approximation brackets, which also have the
    smallest canonical enumeration indices achievable at the requested
    resolution (dyadic brackets would be exponentially deeper).
    """
    if not alpha.is_irrational:
        raise ValueError("bracket an irrational point")
    n = alpha.floor()
    lo, hi = Fraction(n), Fraction(n + 1)
    ln, ld, rn, rd = n, 1, n + 1, 1
    while hi - lo > width:
        mn, md = ln + rn, ld + rd
        m = Fraction(mn, md)
        if ExtReal.from_rat(m).cmp(alpha) < 0:
            ln, ld, lo = mn, md, m
        else:
            rn, rd, hi = mn, md, m
    return lo, hi


@dataclass(frozen=True)
class Interval:
    """An interval denoting only its rational points.

    Closed endpoints must be finite rationals (irrational and infinite
    endpoints are inherently open on the rational line).
    """

    lo: ExtReal = NEG_INF
    hi: ExtReal = POS_INF
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo_closed and not self.lo.is_rational:
            raise ValueError("closed lower endpoint must be rational")
        if self.hi_closed and not self.hi.is_rational:
            raise ValueError("closed upper endpoint must be rational")

    # -- constructors ------------------------------------------------

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(_coerce_pt(lo), _coerce_pt(hi))

    @classmethod
    def closed(cls, lo: RatLike, hi: RatLike) -> "Interval":
        return cls(ExtReal.from_rat(lo), ExtReal.from_rat(hi), True, True)

    @classmethod
    def point(cls, q: RatLike) -> "Interval":
        e = ExtReal.from_rat(q)
        return cls(e, e, True, True)

    @classmethod
    def below(cls, hi, closed: bool = False) -> "Interval":
        return cls(NEG_INF, _coerce_pt(hi), False, closed)

    @classmethod
    def above(cls, lo, closed: bool = False) -> "Interval":
        return cls(_coerce_pt(lo), POS_INF, closed, False)

    @classmethod
    def all(cls) -> "Interval":
        return cls()

    # -- queries -----------------------------------------------------

    def is_empty(self) -> bool:
        c = self.lo.cmp(self.hi)
        if c > 0:
            return True
        if c == 0:
            if not self.lo.is_finite:
                return True
            if self.lo.is_rational:
                return not (self.lo_closed and self.hi_closed)
            return True  # a single irrational point holds no rationals
        return False

    def is_degenerate(self) -> bool:
        return (not self.is_empty()) and self.lo.cmp(self.hi) == 0

    def is_rational_interval(self) -> bool:
        return (self.lo.is_rational or not self.lo.is_finite) and (
            self.hi.is_rational or not self.hi.is_finite
        )

    def is_irrational_interval(self) -> bool:
        return (self.lo.is_irrational or not self.lo.is_finite) and (
            self.hi.is_irrational or not self.hi.is_finite
        )

    def contains(self, q: RatLike) -> bool:
        p = ExtReal.from_rat(q)
        c_lo = p.cmp(self.lo)
        if c_lo < 0 or (c_lo == 0 and not self.lo_closed):
            return False
        c_hi = p.cmp(self.hi)
        if c_hi > 0 or (c_hi == 0 and not self.hi_closed):
            return False
        return True

    def contains_point(self, p: ExtReal) -> bool:
        """Real-line membership (used for cut positions, not just rationals)."""
        c_lo = p.cmp(self.lo)
        if c_lo < 0 or (c_lo == 0 and not self.lo_closed):
            return False
        c_hi = p.cmp(self.hi)
        if c_hi > 0 or (c_hi == 0 and not self.hi_closed):
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        c = self.lo.cmp(other.lo)
        if c > 0 or (c == 0 and not self.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        c = self.hi.cmp(other.hi)
        if c < 0 or (c == 0 and not self.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    def some_rational(self) -> Fraction:
        """A canonical rational member (simplest in Stern-Brocot order)."""
        if self.is_empty():
            raise ValueError("empty interval has no members")
        return simplest_rational_between(
            self.lo, self.hi, not self.lo_closed, not self.hi_closed
        )

    def has_infinitely_many(self) -> bool:
        return (not self.is_empty()) and self.lo.cmp(self.hi) < 0

    def __str__(self) -> str:
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{lb}{self.lo},{self.hi}{rb}"

    __repr__ = __str__


def _coerce_pt(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    return ExtReal.from_rat(x)


@dataclass(frozen=True)
class RatSet:
    """A finitely presented subset of Q.

    Disjoint intervals in increasing order, plus finitely many added
    rationals (outside the interval union) and removed rationals
    (inside it).  Membership is one ordered pass.
    """

    intervals: tuple = ()
    added: tuple = ()
    removed: tuple = ()

    @classmethod
    def build(
        cls,
        intervals: Iterable[Interval] = (),
        added: Iterable[RatLike] = (),
        removed: Iterable[RatLike] = (),
    ) -> "RatSet":
        ivs = sorted(
            (iv for iv in intervals if not iv.is_empty()), key=_interval_sort_key
        )
        union_member = lambda q: any(iv.contains(q) for iv in ivs)
        add = tuple(sorted({rat(q) for q in added if not union_member(rat(q))}))
        rem = tuple(sorted({rat(q) for q in removed if union_member(rat(q))}))
        return cls(tuple(ivs), add, rem)

    @classmethod
    def all_q(cls) -> "RatSet":
        return cls.build([Interval.all()])

    @classmethod
    def of_points(cls, points: Iterable[RatLike]) -> "RatSet":
        return cls.build([], points, [])

    def member(self, q: RatLike) -> bool:
        q = rat(q)
        if q in self.removed:
            return False
        if q in self.added:
            return True
        return any(iv.contains(q) for iv in self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals and not self.added

    def is_infinite(self) -> bool:
        return any(iv.has_infinitely_many() for iv in self.intervals)

    def lower_bound(self) -> Optional[ExtReal]:
        """Greatest lower bound of the set, or None when empty."""
        cands = [iv.lo for iv in self.intervals]
        cands += [ExtReal.from_rat(q) for q in self.added]
        if not cands:
            return None
        best = cands[0]
        for c in cands[1:]:
            if c.cmp(best) < 0:
                best = c
        return best

    def upper_bound(self) -> Optional[ExtReal]:
        cands = [iv.hi for iv in self.intervals]
        cands += [ExtReal.from_rat(q) for q in self.added]
        if not cands:
            return None
        best = cands[0]
        for c in cands[1:]:
            if c.cmp(best) > 0:
                best = c
        return best

    def bounded_below(self) -> bool:
        lb = self.lower_bound()
        return lb is not None and lb.is_finite

    def bounded_above(self) -> bool:
        ub = self.upper_bound()
        return ub is not None and ub.is_finite

    def count_in_interval(self, iv: Interval, cap: int = 3) -> int:
        """Number of members inside iv, saturated at cap (cap means >= cap)."""
        n = 0
        for mine in self.intervals:
            inter = mine.intersect(iv)
            if inter.is_empty():
                continue
            if inter.has_infinitely_many():
                # Removed points cannot thin an infinite set below cap.
                return cap
            q = inter.lo.as_rat()  # degenerate
            if q not in self.removed:
                n += 1
                if n >= cap:
                    return cap
        for q in self.added:
            if iv.contains(q):
                n += 1
                if n >= cap:
                    return cap
        return n

    def shift(self, c: RatLike) -> "RatSet":
        """Translate the whole set by a rational."""
        c = rat(c)
        ce = ExtReal.from_rat(c)
        ivs = [
            Interval(
                iv.lo + ce if iv.lo.is_finite else iv.lo,
                iv.hi + ce if iv.hi.is_finite else iv.hi,
                iv.lo_closed,
                iv.hi_closed,
            )
            for iv in self.intervals
        ]
        return RatSet(tuple(ivs), tuple(q + c for q in self.added), tuple(q + c for q in self.removed))

    def union(self, other: "RatSet") -> "RatSet":
        """Exact union (removed points survive only if absent from both)."""
        removed = [q for q in self.removed if not other.member(q)]
        removed += [q for q in other.removed if not self.member(q)]
        return RatSet.build(
            list(self.intervals) + list(other.intervals),
            added=list(self.added) + list(other.added),
            removed=removed,
        )

    def intersect(self, other: "RatSet") -> "RatSet":
        ivs = []
        for a in self.intervals:
            for b in other.intervals:
                ivs.append(a.intersect(b))
        added = [q for q in list(self.added) + list(other.added) if self.member(q) and other.member(q)]
        removed = list(self.removed) + list(other.removed)
        return RatSet.build(ivs, added=added, removed=removed)

    def subset_of(self, other: "RatSet") -> bool:
        """Exact subset test against another RatSet."""
        for q in self.added:
            if not other.member(q):
                return False
        for iv in self.intervals:
            if iv.is_degenerate():
                q = iv.lo.as_rat()
                if q not in self.removed and not other.member(q):
                    return False
                continue
            # A fat interval must sit inside a single interval of `other`
            # (other's intervals are disjoint; a connected rational set
            # cannot straddle a genuine gap).
            cover = None
            for cand in other.intervals:
                if cand.intersect(iv).has_infinitely_many():
                    cover = cand
                    break
            if cover is None:
                return False
            # Endpoints of iv not inside cover must be removed from self
            # or non-members anyway; we check the only finitely many
            # rationals where coverage can fail: cover's complement within
            # iv is at most the two endpoint rationals plus other.removed.
            suspects = set(other.removed)
            for e, closed in ((iv.lo, iv.lo_closed), (iv.hi, iv.hi_closed)):
                if e.is_rational:
                    suspects.add(e.as_rat())
            for q in suspects:
                if self.member(q) and not other.member(q):
                    return False
            # cover must reach past iv's ends
            if not _edge_covered(iv, cover, low=True) or not _edge_covered(iv, cover, low=False):
                return False
        return True

    def __str__(self) -> str:
        parts = [str(iv) for iv in self.intervals]
        if self.added:
            parts.append("+{" + ",".join(map(str, self.added)) + "}")
        if self.removed:
            parts.append("-{" + ",".join(map(str, self.removed)) + "}")
        return " ".join(parts) if parts else "{}"

    __repr__ = __str__


class _interval_sort_key:
    """Exact comparison key: order intervals by lower endpoint."""

    def __init__(self, iv: Interval):
        self.iv = iv

    def __lt__(self, other: "_interval_sort_key") -> bool:
        c = self.iv.lo.cmp(other.iv.lo)
        if c != 0:
            return c < 0
        return self.iv.lo_closed and not other.iv.lo_closed


def _edge_covered(iv: Interval, cover: Interval, low: bool) -> bool:
    """Does cover extend to iv's lower/upper edge (up to removable points)?"""
    if low:
        c = cover.lo.cmp(iv.lo)
        if c < 0:
            return True
        if c > 0:
            return False
        return cover.lo_closed or not iv.lo_closed
    c = cover.hi.cmp(iv.hi)
    if c > 0:
        return True
    if c < 0:
        return False
    return cover.hi_closed or not iv.hi_closed

"""Canonical, seed-free enumerations of the rationals and derived carriers.

Every lazy construction in this package is a deterministic function of
these enumerations, so their order is normative: the rationals follow
the Calkin-Wilf sequence interleaved with negatives, and product
carriers use diagonal (Cantor) pairing of component indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

from .exactnum import ExtReal, RatSet, rat


class IndexOutOfRange(Exception):
    """nth() beyond a finite carrier."""


class NotInCarrier(Exception):
    """index() of an element outside the carrier."""


@lru_cache(maxsize=None)
def cw(k: int) -> Fraction:
    """k-th Calkin-Wilf rational (k >= 1): cw(1)=1, children a/(a+b), (a+b)/b."""
    if k < 1:
        raise IndexOutOfRange(f"cw index {k}")
    bits = bin(k)[3:]  # path from the root
    a, b = 1, 1
    for bit in bits:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def cw_index(q: Fraction) -> int:
    """Inverse of cw() for positive rationals."""
    a, b = q.numerator, q.denominator
    if a <= 0:
        raise NotInCarrier(f"{q} is not a positive rational")
    bits = []
    while (a, b) != (1, 1):
        if a > b:
            bits.append("1")
            a = a - b
        else:
            bits.append("0")
            b = b - a
    return int("1" + "".join(reversed(bits)), 2)


def cantor_pair(i: int, j: int) -> int:
    s = i + j
    return s * (s + 1) // 2 + j


def cantor_unpair(n: int) -> Tuple[int, int]:
    w = (math.isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


class AllQ:
    """All rationals: 0, 1, -1, 1/2, -1/2, 2, -2, ..."""

    _cache: list = [Fraction(0)]
    _cache_f: list = [0.0]

    def nth(self, n: int) -> Fraction:
        if n < 0:
            raise IndexOutOfRange(str(n))
        cache = AllQ._cache
        while len(cache) <= n:
            m = len(cache)
            k, rem = divmod(m + 1, 2)
            q = cw(k)
            q = q if rem == 0 else -q
            cache.append(q)
            AllQ._cache_f.append(q.numerator / q.denominator)
        return cache[n]

    def nth_float(self, n: int) -> float:
        """Float approximation of nth(n), for sound prefilters."""
        self.nth(n)
        return AllQ._cache_f[n]

    def index(self, x) -> int:
        x = rat(x)
        if x == 0:
            return 0
        k = cw_index(abs(x))
        return 2 * k - 1 if x > 0 else 2 * k

    def size(self) -> Optional[int]:
        return None

    def __repr__(self):
        return "AllQ()"


ALL_Q = AllQ()


def _simplest_positive(lo, lo_strict: bool, hi, hi_strict: bool) -> Optional[Fraction]:
    """Stern-Brocot-simplest positive rational in the window, or None.

    The simplest rational is the unique shallowest tree node inside the
    window, hence also the one of least Calkin-Wilf index among
    positives: deeper nodes all have strictly larger indices.
    """
    # positive part of the window
    if hi is not None and (hi < 0 or (hi == 0)):
        return None
    if lo is None or lo < 0:
        lo, lo_strict = Fraction(0), True
    elif lo == 0:
        lo_strict = True
    # integer first
    n = lo.__floor__() if lo > 0 else 0
    while (lo is not None) and (n < lo or (n == lo and lo_strict)) or n <= 0:
        n += 1
    if hi is None or n < hi or (n == hi and not hi_strict):
        return Fraction(n)
    # whole window inside (m, m+1): continued-fraction descent
    m = n - 1
    new_lo = (Fraction(1) / (hi - m)) if hi is not None else Fraction(0)
    new_lo_strict = hi_strict
    if lo == m:
        sub = _simplest_positive(new_lo, new_lo_strict, None, True)
    else:
        sub = _simplest_positive(new_lo, new_lo_strict, Fraction(1) / (lo - m), lo_strict)
    if sub is None:
        return None
    return m + 1 / sub


def min_index_rational_in(
    lo: Optional[Fraction],
    hi: Optional[Fraction],
    lo_inclusive: bool = False,
    hi_inclusive: bool = False,
    allow_zero: bool = True,
) -> Optional[Tuple[int, Fraction]]:
    """(index, value) of the least-index rational in a window, or None.

    Endpoints participate when inclusive.  Interior candidates are the
    simplest positive and negative rationals; zero when admissible.
    """
    if lo is not None and hi is not None:
        if lo > hi or (lo == hi and not (lo_inclusive and hi_inclusive)):
            return None
    cands = []
    if allow_zero:
        ok_lo = lo is None or lo < 0 or (lo == 0 and lo_inclusive)
        ok_hi = hi is None or hi > 0 or (hi == 0 and hi_inclusive)
        if ok_lo and ok_hi:
            return (0, Fraction(0))
    pos = _simplest_positive(lo, not lo_inclusive, hi, not hi_inclusive)
    if pos is not None:
        cands.append((2 * cw_index(pos) - 1, pos))
    neg = _simplest_positive(
        None if hi is None else -hi, not hi_inclusive, None if lo is None else -lo, not lo_inclusive
    )
    if neg is not None:
        cands.append((2 * cw_index(neg), -neg))
    for bound, inclusive in ((lo, lo_inclusive), (hi, hi_inclusive)):
        if inclusive and bound is not None and (allow_zero or bound != 0):
            k = cw_index(abs(bound)) if bound != 0 else 0
            idx = 0 if bound == 0 else (2 * k - 1 if bound > 0 else 2 * k)
            cands.append((idx, bound))
    if not cands:
        return None
    return min(cands)


def min_index_rational_between_points(lo, hi, lo_strict=True, hi_strict=True, allow_zero=True):
    """(index, value) of the least-index rational between two extended
    points (ExtReal or None for unbounded), or None when empty."""
    from .exactnum import ExtReal, simplest_rational_between, NEG_INF, POS_INF

    lo_e = NEG_INF if lo is None else lo
    hi_e = POS_INF if hi is None else hi
    c = lo_e.cmp(hi_e)
    if c > 0 or (c == 0 and (lo_strict or hi_strict or not lo_e.is_rational)):
        return None
    zero = ExtReal.from_rat(0)
    if allow_zero:
        c_lo = zero.cmp(lo_e)
        c_hi = zero.cmp(hi_e)
        if (c_lo > 0 or (c_lo == 0 and not lo_strict)) and (c_hi < 0 or (c_hi == 0 and not hi_strict)):
            return (0, Fraction(0))
    cands = []
    # positive stripe: the simplest rational is the unique shallowest
    # Stern-Brocot node, hence of least Calkin-Wilf index
    p_lo, p_lo_strict = (lo_e, lo_strict)
    if p_lo.cmp(zero) < 0:
        p_lo, p_lo_strict = zero, True
    elif p_lo.cmp(zero) == 0:
        p_lo_strict = True
    if hi_e.cmp(zero) > 0 and p_lo.cmp(hi_e) < 0:
        try:
            q = simplest_rational_between(p_lo, hi_e, p_lo_strict, hi_strict)
            cands.append((2 * cw_index(q) - 1, q))
        except ValueError:
            pass
    n_hi, n_hi_strict = (hi_e, hi_strict)
    if n_hi.cmp(zero) > 0:
        n_hi, n_hi_strict = zero, True
    elif n_hi.cmp(zero) == 0:
        n_hi_strict = True
    if lo_e.cmp(zero) < 0 and lo_e.cmp(n_hi) < 0:
        try:
            q = simplest_rational_between(-n_hi, -lo_e, n_hi_strict, lo_strict)
            cands.append((2 * cw_index(q), -q))
        except ValueError:
            pass
    for bound_e, strict in ((lo_e, lo_strict), (hi_e, hi_strict)):
        if not strict and bound_e.is_rational:
            q = bound_e.as_rat()
            if allow_zero or q != 0:
                idx = 0 if q == 0 else (2 * cw_index(q) - 1 if q > 0 else 2 * cw_index(-q))
                cands.append((idx, q))
    if not cands:
        return None
    return min(cands)


class OfRatSet:
    """The members of a RatSet in AllQ order (memoized filter)."""

    def __init__(self, carrier: RatSet):
        self.carrier = carrier
        self._members: list = []
        self._members_f: list = []
        self._scanned = 0
        self._size = None
        self._is_all_q = (
            len(carrier.intervals) == 1
            and not carrier.added
            and not carrier.removed
            and carrier.intervals[0].lo.inf == -1
            and carrier.intervals[0].hi.inf == 1
        )
        if not carrier.is_infinite():
            n = len(carrier.added)
            for iv in carrier.intervals:
                if not iv.is_empty():  # degenerate points only
                    q = iv.lo.as_rat()
                    if q not in carrier.removed:
                        n += 1
            self._size = n

    def size(self) -> Optional[int]:
        return self._size

    def _extend_to(self, count: int):
        while len(self._members) < count:
            q = ALL_Q.nth(self._scanned)
            self._scanned += 1
            if self.carrier.member(q):
                self._members.append(q)
                self._members_f.append(q.numerator / q.denominator)

    def nth_float(self, n: int) -> float:
        self.nth(n)
        return self._members_f[n]

    def nth(self, n: int) -> Fraction:
        if n < 0 or (self._size is not None and n >= self._size):
            raise IndexOutOfRange(str(n))
        if self._is_all_q:
            return ALL_Q.nth(n)
        self._extend_to(n + 1)
        return self._members[n]

    def index(self, x) -> int:
        x = rat(x)
        if not self.carrier.member(x):
            raise NotInCarrier(str(x))
        if self._is_all_q:
            return ALL_Q.index(x)
        target = ALL_Q.index(x)
        while self._scanned <= target:
            q = ALL_Q.nth(self._scanned)
            self._scanned += 1
            if self.carrier.member(q):
                self._members.append(q)
                self._members_f.append(q.numerator / q.denominator)
        return self._members.index(x)

    def min_index_columns_between(self, lo: Optional[Fraction], hi: Optional[Fraction]):
        """Least-index carrier members strictly between two rationals,
        one candidate per structural piece of the carrier."""
        from .exactnum import ExtReal

        e_lo = None if lo is None else ExtReal.from_rat(lo)
        e_hi = None if hi is None else ExtReal.from_rat(hi)
        cands = []
        removed = set(self.carrier.removed)

        def best_avoiding(w_lo, w_hi, lo_strict, hi_strict, depth=0):
            found = min_index_rational_between_points(w_lo, w_hi, lo_strict, hi_strict)
            if found is None or found[1] not in removed or depth > len(removed):
                return found
            q_e = ExtReal.from_rat(found[1])
            left = best_avoiding(w_lo, q_e, lo_strict, True, depth + 1)
            right = best_avoiding(q_e, w_hi, True, hi_strict, depth + 1)
            picks = [c for c in (left, right) if c is not None]
            return min(picks) if picks else None

        for piece in self.carrier.intervals:
            w_lo, lo_strict = piece.lo, not piece.lo_closed
            if e_lo is not None and (w_lo.cmp(e_lo) < 0):
                w_lo, lo_strict = e_lo, True
            elif e_lo is not None and w_lo.cmp(e_lo) == 0:
                lo_strict = True
            w_hi, hi_strict = piece.hi, not piece.hi_closed
            if e_hi is not None and (e_hi.cmp(w_hi) < 0):
                w_hi, hi_strict = e_hi, True
            elif e_hi is not None and w_hi.cmp(e_hi) == 0:
                hi_strict = True
            found = best_avoiding(w_lo, w_hi, lo_strict, hi_strict)
            if found is not None:
                cands.append(found[1])
        for q in self.carrier.added:
            if (lo is None or lo < q) and (hi is None or q < hi):
                cands.append(q)
        return [(self.index(q), q) for q in cands]

    def __repr__(self):
        return f"OfRatSet({self.carrier})"


class D0Family:
    """The dense irrational family q + sqrt(2)/n (q rational, n >= 1)."""

    _cache: list = []
    _cache_f: list = []

    def nth(self, n: int) -> ExtReal:
        cache = D0Family._cache
        while len(cache) <= n:
            i, j = cantor_unpair(len(cache))
            x = ExtReal(rat(ALL_Q.nth(i)), Fraction(1, j + 1))
            cache.append(x)
            D0Family._cache_f.append(x.approx())
        return cache[n]

    def nth_float(self, n: int) -> float:
        self.nth(n)
        return D0Family._cache_f[n]

    def index(self, x: ExtReal) -> int:
        if not self.member(x):
            raise NotInCarrier(str(x))
        return cantor_pair(ALL_Q.index(x.a), x.b.denominator - 1)

    @staticmethod
    def member(x: ExtReal) -> bool:
        return x.is_finite and x.b.numerator == 1 and x.b > 0

    def size(self) -> Optional[int]:
        return None

    def __repr__(self):
        return "D0Family()"


class FiniteIrrationals:
    """A finite, sorted tuple of irrational points used as a factor part."""

    def __init__(self, points):
        pts = sorted(points)
        for p in pts:
            if not p.is_irrational:
                raise ValueError(f"{p} is not irrational")
        self.points = tuple(pts)

    def nth(self, n: int) -> ExtReal:
        if not 0 <= n < len(self.points):
            raise IndexOutOfRange(str(n))
        return self.points[n]

    def index(self, x: ExtReal) -> int:
        try:
            return self.points.index(x)
        except ValueError:
            raise NotInCarrier(str(x)) from None

    def member(self, x: ExtReal) -> bool:
        return x in self.points

    def size(self) -> Optional[int]:
        return len(self.points)

    def __repr__(self):
        return f"FiniteIrrationals({list(self.points)})"


@dataclass(frozen=True)
class Tagged:
    """Factor element: an extremal tag or an exact point.

    kind -1/+1 are the below-everything / above-everything tags; kind 0
    carries a point.  Rational points come from Q, irrational ones from
    the attached irrational part; the two never collide.
    """

    kind: int
    point: Optional[ExtReal] = None

    def __lt__(self, other: "Tagged") -> bool:
        if self.kind != other.kind:
            return self.kind < other.kind
        if self.kind != 0:
            return False
        return self.point.cmp(other.point) < 0

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def __str__(self):
        return {-1: "<lo>", 1: "<hi>"}.get(self.kind) or str(self.point)

    __repr__ = __str__


LO_TAG = Tagged(-1)
HI_TAG = Tagged(1)


class TaggedFactor:
    """Disjoint union: irrational part + all rationals + extremal tags.

    The carrier of the first coordinate for injective lazy maps: tags
    (when present) pad the order below/above, the rationals are the
    columns the map lands in, and the irrational part marks where the
    built map is forced to jump.
    """

    def __init__(self, irr_part=None, lo_tag: bool = False, hi_tag: bool = False):
        self.irr = irr_part  # None, FiniteIrrationals, or D0Family
        self.tags = ([LO_TAG] if lo_tag else []) + ([HI_TAG] if hi_tag else [])
        self._nth_cache: list = []
        self._nth_float_cache: list = []

    def _irr_size(self) -> Optional[int]:
        return 0 if self.irr is None else self.irr.size()

    def nth(self, n: int) -> Tagged:
        if n < 0:
            raise IndexOutOfRange(str(n))
        while len(self._nth_cache) <= n:
            self._nth_cache.append(self._compute_nth(len(self._nth_cache)))
        return self._nth_cache[n]

    def nth_float(self, n: int) -> float:
        while len(self._nth_float_cache) <= n:
            e = self.nth(len(self._nth_float_cache))
            if e.kind != 0:
                self._nth_float_cache.append(float("inf") * e.kind)
            else:
                self._nth_float_cache.append(e.point.approx())
        return self._nth_float_cache[n]

    def _compute_nth(self, n: int) -> Tagged:
        t = len(self.tags)
        if n < t:
            return self.tags[n]
        n -= t
        isize = self._irr_size()
        if isize is None:  # infinite irrational part: interleave
            half, rem = divmod(n, 2)
            if rem == 0:
                return Tagged(0, ExtReal.from_rat(ALL_Q.nth(half)))
            return Tagged(0, self.irr.nth(half))
        if n < isize:
            return Tagged(0, self.irr.nth(n))
        return Tagged(0, ExtReal.from_rat(ALL_Q.nth(n - isize)))

    def index(self, x: Tagged) -> int:
        t = len(self.tags)
        if x.kind != 0:
            try:
                return self.tags.index(x)
            except ValueError:
                raise NotInCarrier(str(x)) from None
        isize = self._irr_size()
        if x.point.is_rational:
            qi = ALL_Q.index(x.point.a)
            if isize is None:
                return t + 2 * qi
            return t + isize + qi
        if self.irr is None:
            raise NotInCarrier(str(x))
        ii = self.irr.index(x.point)
        if isize is None:
            return t + 2 * ii + 1
        return t + ii

    def member(self, x: Tagged) -> bool:
        try:
            self.index(x)
            return True
        except NotInCarrier:
            return False

    def size(self) -> Optional[int]:
        return None  # always infinite (contains Q)

    def min_index_columns_between(self, lo: Optional[Tagged], hi: Optional[Tagged]):
        """Per-stripe least-index elements strictly between two elements.

        The returned list contains the overall least-index factor element
        of the open window (tags, prescribed irrationals, the simplest
        rational, and -- for a dense irrational part -- the best lattice
        point), so a caller minimizing over it plus the boundary columns
        sees the true minimum.
        """
        from .exactnum import ExtReal

        out = []

        def inside(x: Tagged) -> bool:
            return (lo is None or lo < x) and (hi is None or x < hi)

        for t_idx, tag in enumerate(self.tags):
            if inside(tag):
                out.append((t_idx, tag))
        t = len(self.tags)
        isize = self._irr_size()
        if lo is not None and lo.kind == 1:
            return out
        if hi is not None and hi.kind == -1:
            return out
        e_lo = lo.point if (lo is not None and lo.kind == 0) else None
        e_hi = hi.point if (hi is not None and hi.kind == 0) else None
        found = min_index_rational_between_points(e_lo, e_hi)
        if found is not None:
            allq_idx, q = found
            i = (t + 2 * allq_idx) if isize is None else (t + isize + allq_idx)
            out.append((i, Tagged(0, ExtReal.from_rat(q))))
        if isize is None:
            out.extend(self._d0_candidates(e_lo, e_hi, t, out))
        elif isize:
            for pos in range(isize):
                p = self.irr.nth(pos)
                tp = Tagged(0, p)
                if inside(tp):
                    out.append((t + pos, tp))
        return out

    _D0_SCAN_CAP = 512
    _D0_DEPTH_CAP = 64

    def _d0_candidates(self, e_lo, e_hi, t: int, others):
        """Best dense-family column in the window.

        Exact minimal index up to the scan/depth caps; beyond them the
        choice stays deterministic but other stripes win by default.
        """
        from .exactnum import ExtReal

        bound = min((i for i, _ in others), default=1 << 40)
        lo_f = None if e_lo is None else e_lo.approx()
        hi_f = None if e_hi is None else e_hi.approx()
        best = None
        # cheap prefix scan
        m = 0
        while t + 2 * m + 1 < bound and m < self._D0_SCAN_CAP:
            x_f = self.irr.nth_float(m)
            pad = 1e-9 * (2.0 + abs(x_f))
            if (lo_f is None or x_f > lo_f - pad) and (hi_f is None or x_f < hi_f + pad):
                x = self.irr.nth(m)
                if (e_lo is None or e_lo.cmp(x) < 0) and (e_hi is None or x.cmp(e_hi) < 0):
                    best = (t + 2 * m + 1, Tagged(0, x))
                    break
            m += 1
        # per-denominator closed form for narrow windows
        n = 1
        while n <= self._D0_DEPTH_CAP:
            cur_bound = best[0] if best else bound
            if t + 2 * cantor_pair(0, n - 1) + 1 >= cur_bound:
                break
            shift = ExtReal.sqrt2(Fraction(1, n))
            w_lo = None if e_lo is None else e_lo - shift
            w_hi = None if e_hi is None else e_hi - shift
            found = min_index_rational_between_points(w_lo, w_hi)
            if found is not None:
                idx = t + 2 * cantor_pair(found[0], n - 1) + 1
                if idx < cur_bound:
                    best = (idx, Tagged(0, ExtReal(found[1], Fraction(1, n))))
            n += 1
        return [best] if best else []

    def __repr__(self):
        return f"TaggedFactor(irr={self.irr}, tags={self.tags})"


class FiberFirstProduct:
    """factor x Q, ordered lexicographically.

    Enumerates the base line (x, 0) at even indices, so reaching the
    n-th base element costs O(n) engine stages; the remaining pairs are
    interleaved diagonally at odd indices.  Requires an infinite factor.
    """

    def __init__(self, factor):
        if factor.size() is not None:
            raise ValueError("factor must be infinite")
        self.factor = factor
        self._nth_cache: list = []

    def nth(self, n: int) -> tuple:
        if n < 0:
            raise IndexOutOfRange(str(n))
        while len(self._nth_cache) <= n:
            self._nth_cache.append(self._compute_nth(len(self._nth_cache)))
        return self._nth_cache[n]

    def _compute_nth(self, n: int) -> tuple:
        half, rem = divmod(n, 2)
        if rem == 0:
            return (self.factor.nth(half), Fraction(0))
        i, j = cantor_unpair(half)
        return (self.factor.nth(i), ALL_Q.nth(j + 1))

    def index(self, x: tuple) -> int:
        i = self.factor.index(x[0])
        k = ALL_Q.index(x[1])
        if k == 0:
            return 2 * i
        return 2 * cantor_pair(i, k - 1) + 1

    def size(self) -> Optional[int]:
        return None

    def __repr__(self):
        return f"FiberFirstProduct({self.factor})"


class Interleaved:
    """Two enumerations riffled together; the second may be finite."""

    def __init__(self, first, second):
        self.first = first
        self.second = second

    def nth(self, n: int):
        ssize = self.second.size()
        if ssize is not None and n >= 2 * ssize:
            return self.first.nth(n - ssize)
        half, rem = divmod(n, 2)
        return self.first.nth(half) if rem == 0 else self.second.nth(half)

    def index(self, x) -> int:
        try:
            j = self.second.index(x)
            return 2 * j + 1
        except NotInCarrier:
            pass
        i = self.first.index(x)
        ssize = self.second.size()
        if ssize is not None and i >= ssize:
            return i + ssize
        return 2 * i

    def size(self) -> Optional[int]:
        fs, ss = self.first.size(), self.second.size()
        if fs is None or ss is None:
            return None
        return fs + ss

    def __repr__(self):
        return f"Interleaved({self.first}, {self.second})"


class LexProduct:
    """factor x second, ordered lexicographically, enumerated diagonally."""

    def __init__(self, factor, second=ALL_Q):
        self.factor = factor
        self.second = second

    def nth(self, n: int) -> tuple:
        fsize = self.factor.size()
        if fsize is not None:
            # finite factor: stripes instead of diagonals
            i, j = n % fsize, n // fsize
            return (self.factor.nth(i), self.second.nth(j))
        i, j = cantor_unpair(n)
        return (self.factor.nth(i), self.second.nth(j))

    def index(self, x: tuple) -> int:
        i = self.factor.index(x[0])
        j = self.second.index(x[1])
        fsize = self.factor.size()
        if fsize is not None:
            return j * fsize + i
        return cantor_pair(i, j)

    def size(self) -> Optional[int]:
        if self.factor.size() == 0:
            return 0
        return None

    def __repr__(self):
        return f"LexProduct({self.factor}, {self.second})"

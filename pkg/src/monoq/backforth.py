"""Deterministic Back&Forth engines over countable dense orders.

A finite strictly (or weakly) increasing partial map is extended one
point at a time.  Every choice the classical argument leaves open is
resolved by the minimal-enumeration-index rule, and a lazily built map
is evaluated by the canonical stage schedule (stage n: Forth on the
n-th source element, then Back on the n-th target element), which makes
the resulting function a pure function of its construction descriptor,
independent of query order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .enumeration import (
    ALL_Q,
    AllQ,
    FiberFirstProduct,
    IndexOutOfRange,
    cantor_pair,
    min_index_rational_in,
)

DEFAULT_FUEL = 10_000


class FuelExhausted(Exception):
    """A lazy evaluation ran out of its stage budget (never a wrong answer)."""


class NoAdmissibleTarget(Exception):
    """Forth step failed: the system is not a Forth system at this state."""


class NoAdmissibleSource(Exception):
    """Back step failed: the system is not a Back system at this state."""


class SeedInconsistent(Exception):
    """A seed map violates the system's admissibility."""


def _float_bounds(lo, hi):
    """Float window bounds when both enum values and bounds are rationals."""
    lo_f = hi_f = None
    if isinstance(lo, Fraction):
        lo_f = lo.numerator / lo.denominator
    if isinstance(hi, Fraction):
        hi_f = hi.numerator / hi.denominator
    return lo_f, hi_f


def _float_outside(y_f: float, lo_f, hi_f) -> bool:
    """Sound rejection: floats of Fractions are correctly rounded, so a
    generous pad guarantees the exact comparison would also reject."""
    if lo_f is not None and y_f < lo_f - 1e-9 * (2.0 + abs(lo_f) + abs(y_f)):
        return True
    if hi_f is not None and y_f > hi_f + 1e-9 * (2.0 + abs(hi_f) + abs(y_f)):
        return True
    return False


class PartialMap:
    """Finite increasing partial map; the unit of every engine.

    Sources are pairwise distinct and kept sorted; targets strictly
    increase in strict mode and weakly increase otherwise.
    """

    __slots__ = ("pairs", "strict", "_by_source", "_targets")

    def __init__(self, pairs: Iterable[Tuple] = (), strict: bool = True):
        self.pairs: List[Tuple] = sorted(pairs, key=_SourceKey)
        self.strict = strict
        self._by_source = {s: t for s, t in self.pairs}
        self._targets = {t for _, t in self.pairs}
        if len(self._by_source) != len(self.pairs):
            raise SeedInconsistent("duplicate sources")
        for (s1, t1), (s2, t2) in zip(self.pairs, self.pairs[1:]):
            if not t1 < t2 and (self.strict or t1 != t2):
                raise SeedInconsistent(f"targets not increasing: {s1}->{t1}, {s2}->{t2}")

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, source):
        return source in self._by_source

    def __call__(self, source):
        return self._by_source[source]

    def get(self, source, default=None):
        return self._by_source.get(source, default)

    def domain(self):
        return [s for s, _ in self.pairs]

    def image(self):
        return [t for _, t in self.pairs]

    def has_target(self, target) -> bool:
        return target in self._targets

    def source_of(self, target):
        i = self._bisect_target(target)
        if i < len(self.pairs) and self.pairs[i][1] == target:
            return self.pairs[i][0]
        return None

    def _bisect_source(self, x) -> int:
        """Index of the first pair whose source is not < x."""
        lo, hi = 0, len(self.pairs)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.pairs[mid][0] < x:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _bisect_target(self, y) -> int:
        lo, hi = 0, len(self.pairs)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.pairs[mid][1] < y:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def source_bracket(self, x) -> Tuple[Optional[Tuple], Optional[Tuple]]:
        """Closest pairs strictly below and above x in source order."""
        i = self._bisect_source(x)
        below = self.pairs[i - 1] if i > 0 else None
        j = i
        while j < len(self.pairs) and not x < self.pairs[j][0]:
            j += 1
        above = self.pairs[j] if j < len(self.pairs) else None
        return below, above

    def target_bracket(self, y) -> Tuple[Optional[Tuple], Optional[Tuple]]:
        """Closest pairs with target strictly below / above y."""
        i = self._bisect_target(y)
        below = self.pairs[i - 1] if i > 0 else None
        j = i
        while j < len(self.pairs) and not y < self.pairs[j][1]:
            j += 1
        above = self.pairs[j] if j < len(self.pairs) else None
        return below, above

    def admits(self, x, y) -> bool:
        """Would inserting x -> y keep the map increasing?"""
        if x in self._by_source:
            return False
        below, above = self.source_bracket(x)
        if below is not None and not (below[1] < y or (not self.strict and below[1] == y)):
            return False
        if above is not None and not (y < above[1] or (not self.strict and y == above[1])):
            return False
        return True

    def insert(self, x, y) -> "PartialMap":
        if not self.admits(x, y):
            raise SeedInconsistent(f"{x}->{y} breaks monotonicity")
        new = PartialMap.__new__(PartialMap)
        new.strict = self.strict
        i = self._bisect_source(x)
        new.pairs = self.pairs[:i] + [(x, y)] + self.pairs[i:]
        new._by_source = dict(self._by_source)
        new._by_source[x] = y
        new._targets = self._targets | {y}
        return new

    def insert_mut(self, x, y):
        """In-place insert for engine-internal memo growth."""
        if not self.admits(x, y):
            raise SeedInconsistent(f"{x}->{y} breaks monotonicity")
        i = self._bisect_source(x)
        self.pairs.insert(i, (x, y))
        self._by_source[x] = y
        self._targets.add(y)

    def restriction(self, sources) -> "PartialMap":
        keep = [(s, t) for s, t in self.pairs if s in set(sources)]
        return PartialMap(keep, strict=self.strict)

    def __repr__(self):
        body = ", ".join(f"{s}->{t}" for s, t in self.pairs)
        return f"PartialMap({{{body}}})"


class _SourceKey:
    def __init__(self, pair):
        self.s = pair[0]

    def __lt__(self, other):
        return self.s < other.s


class ExtensionSystem:
    """A pluggable Back&Forth system between two enumerated carriers.

    The default picks realize a plain order-isomorphism system: the
    admissible window for a new point is the open bracket between its
    neighbours, and candidates are scanned in enumeration order.
    Subclasses override the hooks for constrained systems.
    """

    def __init__(self, source_enum, target_enum, strict: bool = True, back_enabled: bool = True):
        self.source_enum = source_enum
        self.target_enum = target_enum
        self.strict = strict
        self.back_enabled = back_enabled
        self.ac_pool = None  # (membership test for A, enumeration of C)

    # -- hooks ---------------------------------------------------------

    def forth_window(self, m: PartialMap, x) -> Tuple:
        below, above = m.source_bracket(x)
        return (None if below is None else below[1], None if above is None else above[1])

    def forth_extra(self, m: PartialMap, x, y) -> bool:
        return True

    def back_window(self, m: PartialMap, y) -> Tuple:
        below, above = m.target_bracket(y)
        return (None if below is None else below[0], None if above is None else above[0])

    def back_extra(self, m: PartialMap, x, y) -> bool:
        return True

    def scan_limit(self) -> int:
        return 50_000

    # -- picks -----------------------------------------------------------

    def forth_pick(self, m: PartialMap, x):
        lo, hi = self.forth_window(m, x)
        enum = self.target_enum
        if isinstance(enum, AllQ):
            found = min_index_rational_in(lo, hi, not self.strict, not self.strict)
            if found is not None:
                y = found[1]
                if not (m.has_target(y) and self.strict) and self.forth_extra(m, x, y):
                    return y
        lo_f, hi_f = _float_bounds(lo, hi)
        fast = (lo_f is not None or hi_f is not None) and hasattr(enum, "nth_float")
        for k in range(self.scan_limit()):
            try:
                if fast and _float_outside(enum.nth_float(k), lo_f, hi_f):
                    continue
                y = enum.nth(k)
            except IndexOutOfRange:
                break
            if m.has_target(y) and self.strict:
                continue
            if lo is not None and not (lo < y or (not self.strict and lo == y)):
                continue
            if hi is not None and not (y < hi or (not self.strict and y == hi)):
                continue
            if self.forth_extra(m, x, y):
                return y
        raise NoAdmissibleTarget(f"no target for {x}")

    def back_pick(self, m: PartialMap, y):
        lo, hi = self.back_window(m, y)
        enum = self.source_enum
        if isinstance(enum, AllQ):
            found = min_index_rational_in(lo, hi, False, False)
            if found is not None:
                x = found[1]
                if x not in m and self.back_extra(m, x, y):
                    return x
        lo_f, hi_f = _float_bounds(lo, hi)
        fast = (lo_f is not None or hi_f is not None) and hasattr(enum, "nth_float")
        for k in range(self.scan_limit()):
            try:
                if fast and _float_outside(enum.nth_float(k), lo_f, hi_f):
                    continue
                x = enum.nth(k)
            except IndexOutOfRange:
                break
            if x in m:
                continue
            if lo is not None and not lo < x:
                continue
            if hi is not None and not x < hi:
                continue
            if self.back_extra(m, x, y):
                return x
        raise NoAdmissibleSource(f"no source for {y}")

    def ac_back_pick(self, m: PartialMap, y):
        """(A,C)-Back: place a preimage of y inside the pool A."""
        a_member, _ = self.ac_pool
        below, above = m.target_bracket(y)
        lo = None if below is None else below[0]
        hi = None if above is None else above[0]
        for k in range(self.scan_limit()):
            try:
                x = self.source_enum.nth(k)
            except IndexOutOfRange:
                break
            if x in m or not a_member(x):
                continue
            if lo is not None and not lo < x:
                continue
            if hi is not None and not x < hi:
                continue
            if self.back_extra(m, x, y):
                return x
        raise NoAdmissibleSource(f"no pool source for {y}")

    def seed_ok(self, m: PartialMap) -> bool:
        return True


def minimal_product_elem(product: FiberFirstProduct, lo, hi, skip=None, index_cap: int = 1 << 62):
    """The least-index product element strictly inside a window.

    Equivalent to scanning the fiber-first enumeration for the first
    element e with lo < e < hi (either bound may be None), but walks the
    base line and per-column diagonals directly, pruning whole columns
    by first coordinate, so deep second coordinates stay affordable.
    """
    factor = product.factor
    best_idx = index_cap
    best = None
    zero = Fraction(0)
    has_float = hasattr(factor, "nth_float")
    lo_ff = _first_float(lo)
    hi_ff = _first_float(hi)

    def in_window(e) -> bool:
        if lo is not None and not lo < e:
            return False
        if hi is not None and not e < hi:
            return False
        return skip is None or not skip(e)

    def column_meets_window(i: int, f) -> bool:
        if has_float:
            f_f = factor.nth_float(i)
            if lo_ff is not None and f_f < lo_ff - 1e-9 * (2.0 + abs(lo_ff) + abs(f_f)):
                return False
            if hi_ff is not None and f_f > hi_ff + 1e-9 * (2.0 + abs(hi_ff) + abs(f_f)):
                return False
        if lo is not None and f < lo[0]:
            return False
        if hi is not None and hi[0] < f:
            return False
        return True

    def column_candidates(i: int, f):
        nonlocal best_idx, best
        if 2 * i < best_idx:
            e = (f, zero)
            if in_window(e):
                best_idx, best = 2 * i, e
        k_lo = lo[1] if (lo is not None and f == lo[0]) else None
        k_hi = hi[1] if (hi is not None and f == hi[0]) else None
        found = min_index_rational_in(k_lo, k_hi, False, False, allow_zero=False)
        if found is not None:
            j = found[0] - 1
            idx = 2 * cantor_pair(i, j) + 1
            e = (f, found[1])
            if idx < best_idx and in_window(e):
                best_idx, best = idx, e

    if hasattr(factor, "min_index_columns_between"):
        # boundary columns have constrained second coordinates
        seen = []
        for b in (lo, hi):
            if b is not None and b[0] not in seen:
                seen.append(b[0])
                column_candidates(factor.index(b[0]), b[0])
        # interior columns: the per-stripe least-index elements suffice,
        # because a whole interior column is admissible at (f, 0)
        for i, f in factor.min_index_columns_between(
            lo[0] if lo is not None else None, hi[0] if hi is not None else None
        ):
            column_candidates(i, f)
        if best is not None:
            return best
    i = 0
    while 2 * i < best_idx or 2 * cantor_pair(i, 0) + 1 < best_idx:
        if i > 200_000:
            break
        f = factor.nth(i)
        if column_meets_window(i, f):
            column_candidates(i, f)
        i += 1
    if best is None:
        raise NoAdmissibleTarget("no admissible product element below index cap")
    return best


def _first_float(bound):
    if bound is None:
        return None
    f = bound[0]
    if isinstance(f, Fraction):
        return f.numerator / f.denominator
    if hasattr(f, "kind"):
        if f.kind != 0:
            return float("inf") * f.kind
        return f.point.approx()
    return None


class ProductTargetIso(ExtensionSystem):
    """Plain iso system whose target carrier is a fiber-first product."""

    def forth_pick(self, m: PartialMap, x):
        below, above = m.source_bracket(x)
        lo = below[1] if below else None
        hi = above[1] if above else None
        return minimal_product_elem(
            self.target_enum, lo, hi, skip=(m.has_target if self.strict else None)
        )


class ProductSourceIso(ExtensionSystem):
    """Plain iso system whose source carrier is a fiber-first product."""

    def back_pick(self, m: PartialMap, y):
        below, above = m.target_bracket(y)
        lo = below[0] if below else None
        hi = above[0] if above else None
        return minimal_product_elem(self.source_enum, lo, hi, skip=lambda e: e in m)


def forth_step(sys: ExtensionSystem, m: PartialMap, x) -> PartialMap:
    """Extend m by x -> y, y minimal-index admissible."""
    if x in m:
        raise SeedInconsistent(f"{x} already in domain")
    return m.insert(x, sys.forth_pick(m, x))


def back_step(sys: ExtensionSystem, m: PartialMap, y) -> PartialMap:
    """Extend m by x -> y, x minimal-index admissible."""
    if m.has_target(y) and sys.strict:
        raise SeedInconsistent(f"{y} already in image")
    return m.insert(sys.back_pick(m, y), y)


def ac_back_step(sys: ExtensionSystem, m: PartialMap, y) -> PartialMap:
    """Pool-forced Back step: y gains a preimage inside A even if y is hit."""
    if sys.ac_pool is None:
        raise SeedInconsistent("system has no (A,C) pool")
    return m.insert(sys.ac_back_pick(m, y), y)


class LazyIso:
    """A lazily built increasing map, evaluated by the canonical schedule.

    The memo only grows; results never change once produced.  eval(q)
    is a pure function of (system, seed, q).
    """

    def __init__(self, system: ExtensionSystem, seed: Optional[PartialMap] = None):
        self.system = system
        pairs = seed.pairs if seed is not None else ()
        self.memo = PartialMap(pairs, strict=system.strict)
        if not system.seed_ok(self.memo):
            raise SeedInconsistent("seed rejected by system")
        self.stage = 0

    def _run_stage(self):
        sys = self.system
        n = self.stage
        try:
            x = sys.source_enum.nth(n)
        except IndexOutOfRange:
            x = None
        if x is not None and x not in self.memo:
            self.memo.insert_mut(x, sys.forth_pick(self.memo, x))
        if sys.back_enabled:
            if sys.ac_pool is not None:
                a_member, c_enum = sys.ac_pool
                try:
                    y = c_enum.nth(n)
                except IndexOutOfRange:
                    y = None
                if y is not None and not any(
                    t == y and a_member(s) for s, t in self.memo.pairs
                ):
                    self.memo.insert_mut(sys.ac_back_pick(self.memo, y), y)
            else:
                try:
                    y = sys.target_enum.nth(n)
                except IndexOutOfRange:
                    y = None
                if y is not None and not self.memo.has_target(y):
                    self.memo.insert_mut(sys.back_pick(self.memo, y), y)
        self.stage = n + 1

    def run_until(self, done, fuel: int = DEFAULT_FUEL):
        budget = self.stage + fuel
        while not done():
            if self.stage >= budget:
                raise FuelExhausted(f"stage budget {fuel} exhausted")
            self._run_stage()

    def advance_to_stage(self, n: int):
        while self.stage < n:
            self._run_stage()

    def eval(self, q, fuel: int = DEFAULT_FUEL):
        """Image of q under the limit map (runs the schedule as needed)."""
        if q not in self.memo:
            self.run_until(lambda: q in self.memo, fuel)
        return self.memo(q)

    def eval_inv(self, y, fuel: int = DEFAULT_FUEL):
        """Preimage of y (back-enabled systems reach every target)."""
        if not self.memo.has_target(y):
            self.run_until(lambda: self.memo.has_target(y), fuel)
        return self.memo.source_of(y)

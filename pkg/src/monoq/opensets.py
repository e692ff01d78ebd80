"""The constraint algebra of basic open sets of increasing maps.

A BasicOpen is a finite conjunction of typed atoms: pinned values,
one-sided tail bounds, a boundedness class, avoided image intervals,
and image restriction.  The module decides membership (exactly on the
explicit tier), normalizes conjunctions to the stratified form,
translates them under left composition with a fat-fibered map, and
constructs explicit witnesses greedily.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .backforth import DEFAULT_FUEL
from .cuts import Undecided, real_cmp
from .enumeration import ALL_Q
from .exactnum import NEG_INF, POS_INF, ExtReal, Interval, RatSet, rat
from .lazyfns import EngineInjective, GenericSurjectionFn
from .monofn import (
    Affine,
    Block,
    Btype,
    Const,
    ExplicitFn,
    ImageSpec,
    MonoFn,
    PeriodicSet,
    UU,
    compose,
    const_fn,
)

YES, NO, UNKNOWN = "yes", "no", "unknown"


class EmptyInput(Exception):
    pass


class Unsatisfiable(Exception):
    pass


class HypothesisViolated(Exception):
    pass


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pt:
    x: Fraction
    y: Fraction


@dataclass(frozen=True)
class LeftTail:
    """s(-inf, p) inside (-inf, bound] (closed) or (-inf, bound) (open)."""

    p: Fraction
    bound: Fraction
    closed: bool = True

    def target_contains(self, v: Fraction) -> bool:
        return v <= self.bound if self.closed else v < self.bound


@dataclass(frozen=True)
class RightTail:
    """s(p, +inf) inside [bound, +inf) (closed) or (bound, +inf) (open)."""

    p: Fraction
    bound: Fraction
    closed: bool = True

    def target_contains(self, v: Fraction) -> bool:
        return v >= self.bound if self.closed else v > self.bound


@dataclass(frozen=True)
class BTypeAtom:
    btype: Btype


@dataclass(frozen=True)
class Avoid:
    """Img(s) misses the interval (rational or infinite endpoints)."""

    k: Interval

    def __post_init__(self):
        if not self.k.is_rational_interval():
            raise ValueError("avoided intervals have rational or infinite endpoints")

    @property
    def open_ended(self) -> bool:
        return not self.k.lo_closed and not self.k.hi_closed


@dataclass(frozen=True)
class Restrict:
    spec: object  # RatSet or PeriodicSet


Atom = Union[Pt, LeftTail, RightTail, BTypeAtom, Avoid, Restrict]

# family tag -> predicate on atoms
def _tails_closed(a) -> bool:
    return not isinstance(a, (LeftTail, RightTail)) or a.closed


def _avoid_open(a) -> bool:
    return not isinstance(a, Avoid) or a.open_ended


FAMILIES = {
    "T0123": lambda a: not isinstance(a, Restrict),
    "T01cls23opn": lambda a: not isinstance(a, Restrict) and _tails_closed(a) and _avoid_open(a),
    "T023opn": lambda a: isinstance(a, (Pt, BTypeAtom, Avoid)) and _avoid_open(a),
    "T024": lambda a: isinstance(a, (Pt, BTypeAtom, Restrict)),
    "T03opn": lambda a: isinstance(a, (Pt, Avoid)) and _avoid_open(a),
    "T0": lambda a: isinstance(a, Pt),
    "T01cls23opn4": lambda a: _tails_closed(a) and _avoid_open(a),
}


@dataclass(frozen=True)
class BasicOpen:
    atoms: tuple
    family: str = "T0123"

    def __post_init__(self):
        probe = FAMILIES[self.family]
        for a in self.atoms:
            if not probe(a):
                raise ValueError(f"atom {a} not allowed in family {self.family}")
        if sum(isinstance(a, BTypeAtom) for a in self.atoms) > 1:
            raise ValueError("at most one boundedness atom")

    @classmethod
    def of(cls, *atoms, family: str = "T0123") -> "BasicOpen":
        return cls(tuple(atoms), family)

    def pts(self) -> List[Pt]:
        return [a for a in self.atoms if isinstance(a, Pt)]

    def ltails(self) -> List[LeftTail]:
        return [a for a in self.atoms if isinstance(a, LeftTail)]

    def rtails(self) -> List[RightTail]:
        return [a for a in self.atoms if isinstance(a, RightTail)]

    def btype(self) -> Optional[Btype]:
        for a in self.atoms:
            if isinstance(a, BTypeAtom):
                return a.btype
        return None

    def avoids(self) -> List[Avoid]:
        return [a for a in self.atoms if isinstance(a, Avoid)]

    def restrict(self) -> Optional[Restrict]:
        for a in self.atoms:
            if isinstance(a, Restrict):
                return a
        return None


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def member(s: MonoFn, o: BasicOpen, fuel: int = DEFAULT_FUEL, probes: int = 48) -> str:
    """Yes/No exactly on the explicit tier; metadata first, probes second,
    Unknown when fuel-bounded evidence cannot decide a lazy map."""
    verdict = YES
    for atom in o.atoms:
        v = _member_atom(s, atom, fuel, probes)
        if v == NO:
            return NO
        if v == UNKNOWN:
            verdict = UNKNOWN
    return verdict


def _member_atom(s: MonoFn, atom: Atom, fuel: int, probes: int) -> str:
    if isinstance(atom, Pt):
        return YES if s.eval(atom.x, fuel) == atom.y else NO
    if isinstance(atom, LeftTail):
        return _member_ltail(s, atom, fuel, probes)
    if isinstance(atom, RightTail):
        return _member_rtail(s, atom, fuel, probes)
    if isinstance(atom, BTypeAtom):
        bt = s.meta.btype
        if bt is None:
            return UNKNOWN
        return YES if bt == atom.btype else NO
    if isinstance(atom, Avoid):
        return _member_avoid(s, atom, fuel, probes)
    if isinstance(atom, Restrict):
        return _member_restrict(s, atom, fuel, probes)
    raise TypeError(atom)


def _sup_below(s: MonoFn, p: Fraction, fuel: int):
    """(sup s(-inf,p), attained-cofinally) exactly, or None if undecidable."""
    if isinstance(s, ExplicitFn):
        return explicit_sup_below(s, p)
    if isinstance(s, EngineInjective):
        return (s.value_cut(p, -1, fuel), False)
    return None


def _inf_above(s: MonoFn, p: Fraction, fuel: int):
    if isinstance(s, ExplicitFn):
        return explicit_inf_above(s, p)
    if isinstance(s, EngineInjective):
        return (s.value_cut(p, +1, fuel), False)
    return None


def explicit_sup_below(s: ExplicitFn, p: Fraction) -> Tuple[ExtReal, bool]:
    """Exact (sup s(-inf,p), attained anywhere) over the rationals below p."""
    from .monofn import block_value_range

    q0, k = (s._reduce(p) if s.periodic else (p, 0))
    shift = k * s.periodic[1] if s.periodic else Fraction(0)
    q0e = ExtReal.from_rat(q0)
    best: Optional[Tuple[ExtReal, bool]] = None
    for b in s.blocks:
        if b.source.lo.cmp(q0e) >= 0:
            break
        hi_c = b.source.hi.cmp(q0e)
        if hi_c <= 0:
            lo_v, lo_a, hi_v, hi_a = block_value_range(b)
            if hi_c == 0 and b.source.hi_closed and not isinstance(b.action, Const):
                # the boundary point itself is at q0, excluded by x < p
                best = (ExtReal.from_rat(b.action(q0)), False)
            else:
                best = (hi_v, hi_a)
        else:
            act = b.action
            if isinstance(act, Const):
                best = (ExtReal.from_rat(act.value), True)
            else:
                best = (ExtReal.from_rat(act(q0)), False)
            break
    if best is None:
        if s.periodic is None:
            return NEG_INF, False
        # everything earlier lives in the previous window
        _, _, win_sup, win_att = block_value_range(s.blocks[-1])
        return win_sup + ExtReal.from_rat(shift - s.periodic[1]), win_att
    val, att = best
    return (val + ExtReal.from_rat(shift) if val.is_finite and shift else val), att


def explicit_inf_above(s: ExplicitFn, p: Fraction) -> Tuple[ExtReal, bool]:
    """Exact (inf s(p,+inf), attained anywhere) over the rationals above p."""
    from .monofn import block_value_range

    q0, k = (s._reduce(p) if s.periodic else (p, 0))
    shift = k * s.periodic[1] if s.periodic else Fraction(0)
    q0e = ExtReal.from_rat(q0)
    best: Optional[Tuple[ExtReal, bool]] = None
    for b in reversed(s.blocks):
        if b.source.hi.cmp(q0e) <= 0:
            break
        lo_c = b.source.lo.cmp(q0e)
        if lo_c >= 0:
            lo_v, lo_a, hi_v, hi_a = block_value_range(b)
            if lo_c == 0 and b.source.lo_closed and not isinstance(b.action, Const):
                best = (ExtReal.from_rat(b.action(q0)), False)
            else:
                best = (lo_v, lo_a)
        else:
            act = b.action
            if isinstance(act, Const):
                best = (ExtReal.from_rat(act.value), True)
            else:
                best = (ExtReal.from_rat(act(q0)), False)
            break
    if best is None:
        if s.periodic is None:
            return POS_INF, False
        win_inf, win_att = block_value_range(s.blocks[0])[0:2]
        return win_inf + ExtReal.from_rat(shift + s.periodic[1]), win_att
    val, att = best
    return (val + ExtReal.from_rat(shift) if val.is_finite and shift else val), att


def _member_ltail(s: MonoFn, atom: LeftTail, fuel: int, probes: int) -> str:
    got = _sup_below(s, atom.p, fuel)
    if got is not None:
        sup, attained = got
        bound = ExtReal.from_rat(atom.bound)
        try:
            c = real_cmp(sup, bound, fuel) if not isinstance(sup, ExtReal) else sup.cmp(bound)
        except Undecided:
            return UNKNOWN
        if c < 0:
            return YES
        if c > 0:
            return NO
        return YES if (atom.closed or not attained) else NO
    # probe: any witness below p violating the bound answers No
    for n in range(probes):
        q = ALL_Q.nth(n)
        if q < atom.p and not atom.target_contains(s.eval(q, fuel)):
            return NO
    return UNKNOWN


def _member_rtail(s: MonoFn, atom: RightTail, fuel: int, probes: int) -> str:
    got = _inf_above(s, atom.p, fuel)
    if got is not None:
        inf, attained = got
        bound = ExtReal.from_rat(atom.bound)
        try:
            c = real_cmp(inf, bound, fuel) if not isinstance(inf, ExtReal) else inf.cmp(bound)
        except Undecided:
            return UNKNOWN
        if c > 0:
            return YES
        if c < 0:
            return NO
        return YES if (atom.closed or not attained) else NO
    for n in range(probes):
        q = ALL_Q.nth(n)
        if q > atom.p and not atom.target_contains(s.eval(q, fuel)):
            return NO
    return UNKNOWN


def spec_meets_interval(spec: ImageSpec, k: Interval) -> bool:
    """Does an image spec contain a rational inside the interval?"""
    if isinstance(spec, RatSet):
        return spec.count_in_interval(k, cap=1) >= 1
    # periodic: check the shifts whose window can reach the interval
    if spec.window.is_empty():
        return False
    if not k.lo.is_finite or not k.hi.is_finite:
        return True  # unbounded interval always meets an unbounded set
    lo_k = (k.lo - (spec.window.upper_bound() or ExtReal.from_rat(0))).scale(
        Fraction(1, spec.shift)
    ).floor()
    hi_k = (k.hi - (spec.window.lower_bound() or ExtReal.from_rat(0))).scale(
        Fraction(1, spec.shift)
    ).floor()
    for kk in range(lo_k - 1, hi_k + 2):
        shifted = Interval(
            k.lo - ExtReal.from_rat(kk * spec.shift),
            k.hi - ExtReal.from_rat(kk * spec.shift),
            k.lo_closed,
            k.hi_closed,
        )
        if spec.window.count_in_interval(shifted, cap=1) >= 1:
            return True
    return False


def spec_subset(inner: ImageSpec, outer: object) -> Optional[bool]:
    """Exact subset test between image specs where decidable."""
    if isinstance(inner, RatSet) and isinstance(outer, RatSet):
        return inner.subset_of(outer)
    if isinstance(inner, RatSet) and isinstance(outer, PeriodicSet):
        for q in inner.added:
            if not outer.member(q):
                return False
        for iv in inner.intervals:
            if iv.is_degenerate():
                q = iv.lo.as_rat()
                if q not in inner.removed and not outer.member(q):
                    return False
                continue
            # fat piece: build the local union of shifted windows exactly
            if not iv.lo.is_finite or not iv.hi.is_finite:
                return False  # a fat unbounded piece never fits a discrete-ish set
            lo_k = (iv.lo - (outer.window.upper_bound() or ExtReal.from_rat(0))).scale(
                Fraction(1, outer.shift)
            ).floor()
            hi_k = (iv.hi - (outer.window.lower_bound() or ExtReal.from_rat(0))).scale(
                Fraction(1, outer.shift)
            ).floor()
            local = RatSet.build([])
            for kk in range(lo_k - 1, hi_k + 2):
                local = local.union(outer.window.shift(kk * outer.shift))
            piece = RatSet.build([iv], removed=inner.removed)
            if not piece.subset_of(local):
                return False
        return True
    if isinstance(inner, PeriodicSet) and isinstance(outer, RatSet):
        # holds only if outer has unbounded coverage; decide on a window
        if not inner.window.is_empty() and not (outer.bounded_below() or outer.bounded_above()):
            probewin = inner.window
            for kk in (-2, -1, 0, 1, 2):
                if not probewin.shift(kk * inner.shift).subset_of(outer):
                    return False
            return None  # sound refutation only; confirmation undecided
        return False
    return None


def _member_avoid(s: MonoFn, atom: Avoid, fuel: int, probes: int) -> str:
    spec = s.meta.image_spec
    if spec is not None:
        return NO if spec_meets_interval(spec, atom.k) else YES
    for n in range(probes):
        v = s.eval(ALL_Q.nth(n), fuel)
        if atom.k.contains(v):
            return NO
    return UNKNOWN


def _member_restrict(s: MonoFn, atom: Restrict, fuel: int, probes: int) -> str:
    spec = s.meta.image_spec
    if spec is not None:
        got = spec_subset(spec, atom.spec)
        if got is not None:
            return YES if got else NO
    for n in range(probes):
        v = s.eval(ALL_Q.nth(n), fuel)
        if not atom.spec.member(v):
            return NO
    return UNKNOWN


# ---------------------------------------------------------------------------
# Stratification: the eight rewrite rules as a fixpoint
# ---------------------------------------------------------------------------


def stratified_violations(o: BasicOpen) -> List[str]:
    """Names of the structural conditions the representation violates."""
    out = []
    pts = sorted(o.pts(), key=lambda a: a.x)
    lts = sorted(o.ltails(), key=lambda a: a.p)
    rts = sorted(o.rtails(), key=lambda a: a.p)
    avs = sorted(o.avoids(), key=_avoid_key)
    for a, b in zip(pts, pts[1:]):
        if not a.x < b.x:
            out.append("S1")
    for a, b in zip(lts, lts[1:]):
        if not (a.p < b.p and _ltail_subset(a, b)):
            out.append("S2")
    for a, b in zip(rts, rts[1:]):
        if not (a.p < b.p and _rtail_superset(a, b)):
            out.append("S3")
    for a, b in zip(avs, avs[1:]):
        if a.k.hi.cmp(b.k.lo) > 0 or not _gap_between(a.k, b.k):
            out.append("S4")
    for lt in lts:
        for pt in pts:
            if lt.p <= pt.x and lt.target_contains(pt.y):
                out.append("S5")
    for rt in rts:
        for pt in pts:
            if rt.p >= pt.x and rt.target_contains(pt.y):
                out.append("S6")
    for lt in lts:
        for av in avs:
            if _tail_meets(lt, av.k) and not _tail_exceeds(lt, av.k):
                out.append("S7")
    for rt in rts:
        for av in avs:
            if _rtail_meets(rt, av.k) and not _rtail_precedes(rt, av.k):
                out.append("S8")
    return out


def _avoid_key(a: Avoid):
    lo = a.k.lo
    return (lo.inf, lo.a, lo.b)


def _ltail_subset(a: LeftTail, b: LeftTail) -> bool:
    # target of a within target of b
    if a.bound < b.bound:
        return True
    if a.bound == b.bound:
        return b.closed or not a.closed
    return False


def _rtail_superset(a: RightTail, b: RightTail) -> bool:
    # target of a contains target of b
    if a.bound < b.bound:
        return True
    if a.bound == b.bound:
        return a.closed or not b.closed
    return False


def _tail_meets(lt: LeftTail, k: Interval) -> bool:
    # J = (-inf, bound] or (-inf, bound): meets K?
    b = ExtReal.from_rat(lt.bound)
    c = k.lo.cmp(b)
    if c > 0:
        return False
    if c == 0:
        return k.lo_closed and lt.closed
    return True  # K starts strictly below the bound; rationals are dense


def _tail_exceeds(lt: LeftTail, k: Interval) -> bool:
    # exists t in J with t > K
    if not k.hi.is_finite:
        return False
    b = ExtReal.from_rat(lt.bound)
    c = b.cmp(k.hi)
    if c > 0:
        return True
    if c == 0:
        return lt.closed and not k.hi_closed
    return False


def _rtail_meets(rt: RightTail, k: Interval) -> bool:
    b = ExtReal.from_rat(rt.bound)
    c = k.hi.cmp(b)
    if c < 0:
        return False
    if c == 0:
        return k.hi_closed and rt.closed
    return True


def _rtail_precedes(rt: RightTail, k: Interval) -> bool:
    # exists t in J~ with t < K
    if not k.lo.is_finite:
        return False
    b = ExtReal.from_rat(rt.bound)
    c = b.cmp(k.lo)
    if c < 0:
        return True
    if c == 0:
        return rt.closed and not k.lo_closed
    return False


def stratify(o: BasicOpen) -> BasicOpen:
    """Fixpoint of the eight rewrite rules; same denotation, same family."""
    if not o.atoms:
        raise EmptyInput("empty conjunction")
    pts = sorted(set(o.pts()), key=lambda a: a.x)
    for a, b in zip(pts, pts[1:]):
        if a.x == b.x and a.y != b.y:
            raise EmptyInput("conflicting pinned values")
    lts = list(o.ltails())
    rts = list(o.rtails())
    avs = list(o.avoids())
    bt = o.btype()
    rst = o.restrict()
    for _ in range(200):
        changed = False
        # S2: sort left tails; a later (bigger-p) tail with a target inside
        # an earlier one makes the earlier tail redundant
        lts.sort(key=lambda a: (a.p, a.bound, a.closed))
        kept: List[LeftTail] = []
        for t in lts:
            if kept and kept[-1].p == t.p:
                prev = kept.pop()
                t = prev if _ltail_subset(prev, t) else t
                changed = True
            while kept and _ltail_subset(t, kept[-1]):
                kept.pop()
                changed = True
            kept.append(t)
        lts = kept
        # S3 dual: a later tail with a larger target is implied
        rts.sort(key=lambda a: (a.p, a.bound, not a.closed))
        kept_r: List[RightTail] = []
        for t in rts:
            if kept_r and kept_r[-1].p == t.p:
                prev = kept_r.pop()
                t = prev if _rtail_superset(t, prev) else t
                changed = True
            if kept_r and _rtail_superset(t, kept_r[-1]):
                changed = True  # drop t: implied by the earlier tail
                continue
            kept_r.append(t)
        rts = kept_r
        # S4: merge avoided intervals without a genuine gap
        avs.sort(key=_avoid_key)
        merged: List[Avoid] = []
        for a in avs:
            if merged:
                prev = merged[-1]
                overlap = prev.k.hi.cmp(a.k.lo) > 0
                if overlap or not _gap_between(prev.k, a.k):
                    merged[-1] = Avoid(_hull(prev.k, a.k))
                    changed = True
                    continue
            merged.append(a)
        avs = merged
        # S5/S6: a pinned value inside a tail target makes the tail redundant
        lts2 = [t for t in lts if not any(t.p <= p.x and t.target_contains(p.y) for p in pts)]
        rts2 = [t for t in rts if not any(t.p >= p.x and t.target_contains(p.y) for p in pts)]
        changed |= len(lts2) != len(lts) or len(rts2) != len(rts)
        lts, rts = lts2, rts2
        # S7/S8: shrink tail targets clipped by an avoided interval
        new_lts = []
        for t in lts:
            for a in avs:
                if _tail_meets(t, a.k) and not _tail_exceeds(t, a.k):
                    if not a.k.lo.is_finite:
                        raise EmptyInput("tail forced into an avoided half-line")
                    t = LeftTail(t.p, a.k.lo.as_rat(), closed=not a.k.lo_closed)
                    changed = True
            new_lts.append(t)
        lts = new_lts
        new_rts = []
        for t in rts:
            for a in avs:
                if _rtail_meets(t, a.k) and not _rtail_precedes(t, a.k):
                    if not a.k.hi.is_finite:
                        raise EmptyInput("tail forced into an avoided half-line")
                    t = RightTail(t.p, a.k.hi.as_rat(), closed=not a.k.hi_closed)
                    changed = True
            new_rts.append(t)
        rts = new_rts
        if not changed:
            break
    else:
        raise RuntimeError("stratification failed to stabilize")
    atoms: List[Atom] = list(pts) + list(lts) + list(rts)
    if bt is not None:
        atoms.append(BTypeAtom(bt))
    atoms += avs
    if rst is not None:
        atoms.append(rst)
    return BasicOpen(tuple(atoms), o.family)


def _gap_between(k1: Interval, k2: Interval) -> bool:
    """A rational strictly between the two avoided intervals, in neither."""
    gap = Interval(k1.hi, k2.lo, not k1.hi_closed, not k2.lo_closed)
    return not gap.is_empty()


def _hull(k1: Interval, k2: Interval) -> Interval:
    lo, lo_c = (k1.lo, k1.lo_closed)
    if k2.lo.cmp(k1.lo) < 0 or (k2.lo.cmp(k1.lo) == 0 and k2.lo_closed):
        lo, lo_c = k2.lo, k2.lo_closed
    hi, hi_c = (k2.hi, k2.hi_closed)
    if k1.hi.cmp(k2.hi) > 0 or (k1.hi.cmp(k2.hi) == 0 and k1.hi_closed):
        hi, hi_c = k1.hi, k1.hi_closed
    return Interval(lo, hi, lo_c, hi_c)


# ---------------------------------------------------------------------------
# Witness construction and emptiness
# ---------------------------------------------------------------------------


def construct_member(o: BasicOpen, include: Optional[Fraction] = None, fuel: int = DEFAULT_FUEL) -> ExplicitFn:
    """A greedy explicit witness of the conjunction (include forces a value
    into the image); raises Unsatisfiable when the propagation dead-ends."""
    o = stratify(o)
    pts = sorted(o.pts(), key=lambda a: a.x)
    lts, rts, avs = o.ltails(), o.rtails(), o.avoids()
    bt = o.btype()
    rst = o.restrict()
    if rst is not None and not isinstance(rst.spec, RatSet):
        raise Unsatisfiable("only rational-set restrictions are constructible")

    allowed = _allowed_values(avs, rst.spec if rst else None)

    def value_ok(v: Fraction) -> bool:
        return allowed.member(v)

    # monotone consistency of pinned points
    for a, b in zip(pts, pts[1:]):
        if a.x == b.x and a.y != b.y:
            raise Unsatisfiable("conflicting pins")
        if a.y > b.y:
            raise Unsatisfiable("pins not increasing")
    for p in pts:
        if not value_ok(p.y):
            raise Unsatisfiable(f"pinned value {p.y} lands in an avoided region")
        for t in lts:
            if p.x < t.p and not t.target_contains(p.y):
                raise Unsatisfiable("pin violates a left tail")
        for t in rts:
            if p.x > t.p and not t.target_contains(p.y):
                raise Unsatisfiable("pin violates a right tail")
    if bt is not None:
        if not bt.below and allowed.bounded_below():
            raise Unsatisfiable("unbounded-below impossible in the allowed range")
        if not bt.above and allowed.bounded_above():
            raise Unsatisfiable("unbounded-above impossible in the allowed range")

    if include is not None:
        include = rat(include)
        pts = _place_include(pts, lts, rts, include, value_ok)

    return _assemble_witness(pts, lts, rts, bt, allowed)


def is_empty(o: BasicOpen) -> bool:
    """Constructive emptiness: the greedy builder either yields a member
    or the propagation exhibits a dead end."""
    try:
        construct_member(o)
        return False
    except (Unsatisfiable, EmptyInput):
        return True


def _allowed_values(avs: Sequence[Avoid], restrict: Optional[RatSet]) -> RatSet:
    """Q minus the avoided intervals, intersected with the restriction."""
    pieces = []
    cursor: ExtReal = NEG_INF
    cursor_closed = False
    for a in sorted(avs, key=_avoid_key):
        k = a.k
        pieces.append(Interval(cursor, k.lo, cursor_closed, not k.lo_closed))
        cursor, cursor_closed = k.hi, not k.hi_closed
    pieces.append(Interval(cursor, POS_INF, cursor_closed, False))
    base = RatSet.build(pieces)
    if restrict is not None:
        base = base.intersect(restrict)
    return base


def _place_include(pts, lts, rts, q: Fraction, value_ok) -> list:
    if any(p.y == q for p in pts):
        return pts
    if not value_ok(q):
        raise Unsatisfiable(f"include value {q} is not allowed")
    # position bounds from the pinned sequence
    lo_x = None
    hi_x = None
    for p in pts:
        if p.y < q:
            lo_x = p.x if lo_x is None or p.x > lo_x else lo_x
        if p.y > q:
            hi_x = p.x if hi_x is None or p.x < hi_x else hi_x
        if p.y == q:
            return pts
    # tails restrict where the value q may be attained
    for t in lts:
        if not t.target_contains(q):
            lo_x = t.p if lo_x is None or t.p > lo_x else lo_x
    for t in rts:
        if not t.target_contains(q):
            hi_x = t.p if hi_x is None or t.p < hi_x else hi_x
    lo_e = NEG_INF if lo_x is None else ExtReal.from_rat(lo_x)
    hi_e = POS_INF if hi_x is None else ExtReal.from_rat(hi_x)
    if lo_e.cmp(hi_e) >= 0:
        raise Unsatisfiable(f"no position can attain {q}")
    x_new = Interval(lo_e, hi_e).some_rational()
    return sorted(pts + [Pt(x_new, q)], key=lambda a: a.x)


def _assemble_witness(pts, lts, rts, bt: Optional[Btype], allowed: RatSet) -> ExplicitFn:
    # one pass left to right over cells between the breakpoints
    xs = sorted({p.x for p in pts} | {t.p for t in lts} | {t.p for t in rts})
    pin = {p.x: p.y for p in pts}

    def cell_window(left, right, prev_value):
        """Allowed value window for a cell (left, right)."""
        lo, lo_strict = prev_value, False
        hi, hi_strict = None, False
        for p in pts:
            if p.x >= right if right is not None else False:
                hi_c = p.y
                if hi is None or hi_c < hi:
                    hi, hi_strict = hi_c, False
        for t in lts:
            if right is not None and right <= t.p:
                cand, strict = t.bound, not t.closed
                if hi is None or cand < hi or (cand == hi and strict):
                    hi, hi_strict = cand, strict
        for t in rts:
            if left is not None and left >= t.p:
                cand, strict = t.bound, not t.closed
                if lo is None or cand > lo or (cand == lo and strict):
                    lo, lo_strict = cand, strict
        return lo, lo_strict, hi, hi_strict

    def choose(lo, lo_strict, hi, hi_strict) -> Fraction:
        lo_e = NEG_INF if lo is None else ExtReal.from_rat(lo)
        hi_e = POS_INF if hi is None else ExtReal.from_rat(hi)
        for piece in allowed.intervals:
            win = piece.intersect(Interval(lo_e, hi_e, not lo_strict, not hi_strict))
            if win.is_empty():
                continue
            cand = win.some_rational()
            steps = 0
            while cand in allowed.removed:
                steps += 1
                sub = Interval(ExtReal.from_rat(cand), win.hi, False, win.hi_closed)
                if sub.is_empty() or steps > len(allowed.removed) + 1:
                    cand = None
                    break
                cand = sub.some_rational()
            if cand is not None:
                return cand
        for q in allowed.added:
            ok_lo = lo is None or q > lo or (q == lo and not lo_strict)
            ok_hi = hi is None or q < hi or (q == hi and not hi_strict)
            if ok_lo and ok_hi:
                return q
        raise Unsatisfiable("no allowed value in a cell window")

    blocks: List[Block] = []
    prev_val: Optional[Fraction] = None
    edges = [None] + xs  # cell i spans (edges[i], xs[i]) then the pin at xs[i]
    for i, x in enumerate(xs):
        left = edges[i]
        lo, lo_s, hi, hi_s = cell_window(left, x, prev_val)
        if x in pin:
            v_pin = pin[x]
        else:
            v_pin = None
        # the open cell before x
        cell_lo = NEG_INF if left is None else ExtReal.from_rat(left)
        cell = Interval(cell_lo, ExtReal.from_rat(x), False, False)
        if not cell.is_empty():
            hi_cell, hi_cell_s = hi, hi_s
            if v_pin is not None and (hi_cell is None or v_pin <= hi_cell):
                hi_cell, hi_cell_s = v_pin, False
            v = choose(lo, lo_s, hi_cell, hi_cell_s)
            blocks.append(Block(cell, Const(v)))
            prev_val = v
        # the pin itself
        if v_pin is not None:
            if prev_val is not None and v_pin < prev_val:
                raise Unsatisfiable("pin below an earlier forced value")
            blocks.append(Block(Interval.closed(x, x), Const(v_pin)))
            prev_val = v_pin
        else:
            lo2, lo2_s, hi2, hi2_s = cell_window(x, x, prev_val)
            v = choose(lo2, lo2_s, hi2, hi2_s)
            blocks.append(Block(Interval.closed(x, x), Const(v)))
            prev_val = v
    # final unbounded cell
    left = xs[-1] if xs else None
    lo, lo_s, hi, hi_s = cell_window(left, None, prev_val)
    cell_lo = NEG_INF if left is None else ExtReal.from_rat(left)
    last_cell = Interval(cell_lo, POS_INF, False, False)
    v_last = choose(lo, lo_s, hi, hi_s)
    blocks.append(Block(last_cell, Const(v_last)))

    blocks = _apply_btype_tails(blocks, bt, allowed, lts, rts)
    return ExplicitFn(blocks)


def _apply_btype_tails(blocks, bt: Optional[Btype], allowed: RatSet, lts, rts):
    """Replace the constant end cells by affine dives where unboundedness
    is required.  The dive is placed past every breakpoint and its values
    stay strictly below / above every remaining constraint."""
    if bt is None:
        return blocks
    if not bt.below:
        piece = allowed.intervals[0] if allowed.intervals else None
        if piece is None or piece.lo.cmp(NEG_INF) != 0:
            raise Unsatisfiable("unbounded-below blocked in the allowed range")
        v_caps = [ExtReal.from_rat(_leftmost_value(blocks))]
        if piece.hi.is_finite:
            v_caps.append(piece.hi)
        v_caps += [ExtReal.from_rat(q) for q in allowed.removed]
        anchor_v = Fraction(min(c.floor() for c in v_caps) - 1)
        x_caps = [_first_breakpoint(blocks)]
        x_caps += [ExtReal.from_rat(t.p) for t in rts]
        anchor_x = Fraction(min(c.floor() for c in x_caps if c.is_finite) - 1) if any(
            c.is_finite for c in x_caps
        ) else Fraction(0)
        tail = Block(
            Interval(NEG_INF, ExtReal.from_rat(anchor_x), False, True),
            Affine(Fraction(1), anchor_v - anchor_x),
        )
        blocks = [tail] + _clip_left(blocks, anchor_x)
    if not bt.above:
        piece = allowed.intervals[-1] if allowed.intervals else None
        if piece is None or piece.hi.cmp(POS_INF) != 0:
            raise Unsatisfiable("unbounded-above blocked in the allowed range")
        v_floors = [ExtReal.from_rat(_rightmost_value(blocks))]
        if piece.lo.is_finite:
            v_floors.append(piece.lo)
        v_floors += [ExtReal.from_rat(q) for q in allowed.removed]
        anchor_v = Fraction(max(c.floor() for c in v_floors) + 2)
        x_caps = [_last_breakpoint(blocks)]
        x_caps += [ExtReal.from_rat(t.p) for t in lts]
        anchor_x = Fraction(max(c.floor() for c in x_caps if c.is_finite) + 1) if any(
            c.is_finite for c in x_caps
        ) else Fraction(0)
        tail = Block(
            Interval(ExtReal.from_rat(anchor_x), POS_INF, False, False),
            Affine(Fraction(1), anchor_v - anchor_x),
        )
        blocks = _clip_right(blocks, anchor_x) + [tail]
    return blocks


def _leftmost_value(blocks) -> Fraction:
    b = blocks[0]
    if isinstance(b.action, Const):
        return b.action.value
    raise Unsatisfiable("cannot dive below a non-constant end cell")


def _rightmost_value(blocks) -> Fraction:
    b = blocks[-1]
    if isinstance(b.action, Const):
        return b.action.value
    raise Unsatisfiable("cannot climb above a non-constant end cell")


def _first_breakpoint(blocks) -> ExtReal:
    for b in blocks:
        if b.source.hi.is_finite:
            return b.source.hi
    return ExtReal.from_rat(0)


def _last_breakpoint(blocks) -> ExtReal:
    for b in reversed(blocks):
        if b.source.lo.is_finite:
            return b.source.lo
    return ExtReal.from_rat(0)


def _clip_left(blocks, x: Fraction):
    """Drop block mass at and below x; reanchor the first remaining block."""
    xe = ExtReal.from_rat(x)
    out = []
    for b in blocks:
        if b.source.hi.cmp(xe) <= 0:
            continue
        lo = b.source.lo
        if lo.cmp(xe) < 0:
            b = Block(Interval(xe, b.source.hi, False, b.source.hi_closed), b.action)
        out.append(b)
    return out


def _clip_right(blocks, x: Fraction):
    xe = ExtReal.from_rat(x)
    out = []
    for b in blocks:
        if b.source.lo.cmp(xe) >= 0:
            continue
        hi = b.source.hi
        if hi.cmp(xe) > 0:
            b = Block(Interval(b.source.lo, xe, b.source.lo_closed, True), b.action)
        out.append(b)
    return out


# ---------------------------------------------------------------------------
# Translation under left composition
# ---------------------------------------------------------------------------


def translate(f: MonoFn, o: BasicOpen, fuel: int = DEFAULT_FUEL) -> BasicOpen:
    """The image of a stratified conjunction under s' -> f.s'.

    f must be unbounded on both sides with endpoint-free point fibers:
    the translated set pins f-images, closes tail targets at the tails'
    suprema, opens the avoided intervals between f-images, and restricts
    the image to f's image.
    """
    _require_fat_fibers(f)
    if stratified_violations(o):
        raise HypothesisViolated("input must be stratified")
    atoms: List[Atom] = [Restrict(f.meta.image_spec)]
    for p in o.pts():
        atoms.append(Pt(p.x, f.eval(p.y, fuel)))
    for t in o.ltails():
        atoms.append(LeftTail(t.p, f.eval(t.bound, fuel), closed=True))
    for t in o.rtails():
        atoms.append(RightTail(t.p, f.eval(t.bound, fuel), closed=True))
    bt = o.btype()
    if bt is not None:
        atoms.append(BTypeAtom(bt))
    for a in o.avoids():
        lo, hi = a.k.lo, a.k.hi
        new_lo = NEG_INF if not lo.is_finite else ExtReal.from_rat(f.eval(lo.as_rat(), fuel))
        new_hi = POS_INF if not hi.is_finite else ExtReal.from_rat(f.eval(hi.as_rat(), fuel))
        k = Interval(new_lo, new_hi, False, False)
        if not k.is_empty():
            atoms.append(Avoid(k))
    return BasicOpen(tuple(atoms), "T01cls23opn4")


def _require_fat_fibers(f: MonoFn):
    if isinstance(f, GenericSurjectionFn):
        if f.meta.btype != UU:
            raise HypothesisViolated("translation needs an unbounded-unbounded map")
        return
    if isinstance(f, ExplicitFn):
        if f.meta.btype != UU:
            raise HypothesisViolated("translation needs an unbounded-unbounded map")
        for b in f.blocks:
            if not isinstance(b.action, Const):
                raise HypothesisViolated("point fibers must be fat intervals")
            if b.source.lo_closed or b.source.hi_closed:
                raise HypothesisViolated("fibers must not contain their endpoints")
            if b.source.lo.is_rational or b.source.hi.is_rational:
                raise HypothesisViolated("fiber boundaries must be irrational")
        return
    raise HypothesisViolated("unsupported map kind for translation")


# ---------------------------------------------------------------------------
# Boundedness-class decomposition of unions
# ---------------------------------------------------------------------------


def decompose_ABCD(parts: Sequence[BasicOpen]):
    """Split a union of T023opn basics into pointwise parts per
    boundedness class and a residual of avoid-carrying basics."""
    from .monofn import BB, BU, UB

    buckets = {UU: [], BU: [], UB: [], BB: []}
    residual = []
    for o in parts:
        if o.avoids():
            residual.append(o)
            continue
        bt = o.btype()
        pointwise = BasicOpen(tuple(o.pts()), "T0")
        for key in buckets if bt is None else (bt,):
            buckets[key].append(pointwise)
    return buckets[UU], buckets[BU], buckets[UB], buckets[BB], residual


# ---------------------------------------------------------------------------
# The coarsest-topology gadget
# ---------------------------------------------------------------------------


def pinch_fn(y: Fraction) -> ExplicitFn:
    """y-1 below y, y at y, y+1 above y."""
    y = rat(y)
    return ExplicitFn(
        [
            Block(Interval(NEG_INF, ExtReal.from_rat(y), False, False), Const(y - 1)),
            Block(Interval.point(y), Const(y)),
            Block(Interval(ExtReal.from_rat(y), POS_INF, False, False), Const(y + 1)),
        ]
    )


def gadget_pointwise_closed(s: MonoFn, x, y, fuel: int = DEFAULT_FUEL) -> bool:
    """Whether pinch_y . s . const_x is one of the constants y-1, y+1
    (equivalently: s(x) != y, which makes pointwise sets co-closed)."""
    x, y = rat(x), rat(y)
    composed = compose(pinch_fn(y), compose(s, const_fn(x)))
    probes = [composed.eval(ALL_Q.nth(n), fuel) for n in range(5)]
    first = probes[0]
    assert all(v == first for v in probes)
    return first in (y - 1, y + 1)

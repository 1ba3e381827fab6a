"""Exact open-region payloads for the two shipped spaces.

A line region is a finite union of open intervals with rational endpoints,
stored sorted and pairwise disjoint.  Intervals that share only an endpoint
are kept separate: (0,1) union (1,2) misses the point 1 and is a different
set from (0,2).  ``regularize`` is the operation that heals such pinholes.

A Cantor-space region is a finite union of cylinders, stored as the unique
canonical antichain of binary prefixes: no member is a prefix of another and
no two siblings w0, w1 are both present (they merge into w).  Cylinders are
clopen, so complements are exact and boundaries are empty.

All functions are total and exact; nothing here approximates.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvariantViolation

Interval = tuple[Fraction, Fraction]


class LineRegion:
    """Finite union of disjoint open rational intervals, sorted ascending."""

    __slots__ = ("parts",)

    def __init__(self, parts: tuple[Interval, ...]) -> None:
        object.__setattr__(self, "parts", parts)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("LineRegion is immutable")

    @property
    def is_empty(self) -> bool:
        return not self.parts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LineRegion):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        if not self.parts:
            return "LineRegion(empty)"
        body = " u ".join(f"({a},{b})" for a, b in self.parts)
        return f"LineRegion[{body}]"


LINE_EMPTY = LineRegion(())


def line_region(intervals: Iterable[tuple[Fraction, Fraction]]) -> LineRegion:
    """Build a canonical line region from arbitrary open intervals.

    Degenerate intervals are dropped, overlapping ones are merged; intervals
    that merely touch stay separate because their union misses the shared
    endpoint.
    """
    cleaned = sorted((Fraction(a), Fraction(b)) for a, b in intervals if a < b)
    merged: list[Interval] = []
    for lo, hi in cleaned:
        if merged and lo < merged[-1][1]:
            last_lo, last_hi = merged[-1]
            merged[-1] = (last_lo, max(last_hi, hi))
        else:
            merged.append((lo, hi))
    return LineRegion(tuple(merged))


def interval(a, b) -> LineRegion:
    a = Fraction(a)
    b = Fraction(b)
    if not a < b:
        raise InvariantViolation(f"interval needs a < b, got ({a}, {b})")
    return LineRegion(((a, b),))


def line_meet(x: LineRegion, y: LineRegion) -> LineRegion:
    """Intersection of two unions of open intervals."""
    out: list[Interval] = []
    i = j = 0
    px, py = x.parts, y.parts
    while i < len(px) and j < len(py):
        lo = max(px[i][0], py[j][0])
        hi = min(px[i][1], py[j][1])
        if lo < hi:
            out.append((lo, hi))
        if px[i][1] <= py[j][1]:
            i += 1
        else:
            j += 1
    return LineRegion(tuple(out))


def line_meet_exterior(x: LineRegion, v: LineRegion) -> LineRegion:
    """Intersection of x with the exterior of v.

    The exterior of a finite interval union is the complement of its
    closure, so this is exactly closure subtraction.
    """
    return line_minus_closure(x, v.parts)


def line_minus_closure(x: LineRegion, closed: Sequence[Interval]) -> LineRegion:
    """x minus a union of closed intervals [a, b]; exact and open."""
    parts = list(x.parts)
    for a, b in closed:
        nxt: list[Interval] = []
        for lo, hi in parts:
            if hi <= a or lo >= b:
                nxt.append((lo, hi))
                continue
            if lo < a:
                nxt.append((lo, a))
            if hi > b:
                nxt.append((b, hi))
        parts = nxt
    return LineRegion(tuple(parts))


def line_union(x: LineRegion, y: LineRegion) -> LineRegion:
    """Union as a point set; overlapping intervals merge, touching ones
    stay separate."""
    return line_region(list(x.parts) + list(y.parts))


def line_regularize(x: LineRegion) -> LineRegion:
    """Interior of the closure: merge intervals that touch at endpoints."""
    if not x.parts:
        return x
    merged: list[Interval] = [x.parts[0]]
    for lo, hi in x.parts[1:]:
        last_lo, last_hi = merged[-1]
        if lo <= last_hi:
            merged[-1] = (last_lo, max(last_hi, hi))
        else:
            merged.append((lo, hi))
    return LineRegion(tuple(merged))


def line_subset(x: LineRegion, y: LineRegion) -> bool:
    """x subset of y.  Each x part must sit inside a single y part: y parts
    that merely touch leave the shared endpoint uncovered."""
    lows = [p[0] for p in y.parts]
    for lo, hi in x.parts:
        k = bisect_right(lows, lo) - 1
        if k < 0 or not (y.parts[k][0] <= lo and hi <= y.parts[k][1]):
            return False
    return True


def line_closure_strictly_inside(x: LineRegion, y: LineRegion) -> bool:
    """closure(x) contained in y with nonempty leftover y \\ closure(x)."""
    if y.is_empty:
        return False
    if x.is_empty:
        return True
    lows = [p[0] for p in y.parts]
    for lo, hi in x.parts:
        k = bisect_right(lows, lo) - 1
        if k < 0 or not (y.parts[k][0] < lo and hi < y.parts[k][1]):
            return False
    return True


def line_contains_point(x: LineRegion, p: Fraction) -> bool:
    lows = [q[0] for q in x.parts]
    k = bisect_right(lows, p) - 1
    return k >= 0 and x.parts[k][0] < p < x.parts[k][1]


def line_boundary_points(x: LineRegion) -> tuple[Fraction, ...]:
    """Topological boundary of a finite interval union: the endpoints."""
    pts: set[Fraction] = set()
    for lo, hi in x.parts:
        pts.add(lo)
        pts.add(hi)
    return tuple(sorted(pts))


# -- Cantor space ----------------------------------------------------------


class CantorRegion:
    """Finite union of cylinders as a canonical antichain of prefixes."""

    __slots__ = ("prefixes",)

    def __init__(self, prefixes: tuple[str, ...]) -> None:
        object.__setattr__(self, "prefixes", prefixes)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("CantorRegion is immutable")

    @property
    def is_empty(self) -> bool:
        return not self.prefixes

    @property
    def is_everything(self) -> bool:
        return self.prefixes == ("",)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CantorRegion):
            return NotImplemented
        return self.prefixes == other.prefixes

    def __hash__(self) -> int:
        return hash(self.prefixes)

    def __repr__(self) -> str:
        if not self.prefixes:
            return "CantorRegion(empty)"
        body = ", ".join(repr(p) for p in self.prefixes)
        return f"CantorRegion[{body}]"


CANTOR_EMPTY = CantorRegion(())
CANTOR_ALL = CantorRegion(("",))


def cantor_region(prefixes: Iterable[str]) -> CantorRegion:
    """Canonicalize: drop dominated prefixes, merge sibling pairs, sort."""
    members = set(prefixes)
    for p in members:
        if set(p) - {"0", "1"}:
            raise InvariantViolation(f"prefix must be over 0/1, got {p!r}")
    changed = True
    while changed:
        changed = False
        # absorb descendants into ancestors
        drop = set()
        for p in members:
            for q in members:
                if p != q and p.startswith(q):
                    drop.add(p)
        if drop:
            members -= drop
            changed = True
        # merge sibling pairs
        for p in sorted(members):
            if p.endswith("0") and p[:-1] + "1" in members:
                members.discard(p)
                members.discard(p[:-1] + "1")
                members.add(p[:-1])
                changed = True
                break
    return CantorRegion(tuple(sorted(members)))


def cantor_meet(x: CantorRegion, y: CantorRegion) -> CantorRegion:
    out = []
    for p in x.prefixes:
        for q in y.prefixes:
            if p.startswith(q):
                out.append(p)
            elif q.startswith(p):
                out.append(q)
    return cantor_region(out)


def _cantor_complement_single(w: str) -> CantorRegion:
    if w == "":
        return CANTOR_EMPTY
    out = []
    for i, bit in enumerate(w):
        out.append(w[:i] + ("1" if bit == "0" else "0"))
    return cantor_region(out)


def cantor_complement(x: CantorRegion) -> CantorRegion:
    """Exact complement; cylinders are clopen so this is again a region."""
    comp = CANTOR_ALL
    for w in x.prefixes:
        comp = cantor_meet(comp, _cantor_complement_single(w))
    return comp


def cantor_minus(x: CantorRegion, y: CantorRegion) -> CantorRegion:
    return cantor_meet(x, cantor_complement(y))


def cantor_union(x: CantorRegion, y: CantorRegion) -> CantorRegion:
    return cantor_region(x.prefixes + y.prefixes)


def cantor_subset(x: CantorRegion, y: CantorRegion) -> bool:
    return all(
        any(p.startswith(q) for q in y.prefixes)
        for p in x.prefixes
    )


def cantor_closure_strictly_inside(x: CantorRegion, y: CantorRegion) -> bool:
    """Cylinders are closed, so this is subset plus strictness."""
    if y.is_empty:
        return False
    return cantor_subset(x, y) and not cantor_minus(y, x).is_empty


def cantor_contains_point(x: CantorRegion, point: str) -> bool:
    """Membership for a point given as a long binary word (a finite stand-in
    for an infinite sequence; callers supply words longer than any prefix)."""
    return any(point.startswith(p) for p in x.prefixes)

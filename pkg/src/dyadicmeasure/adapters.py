"""Space adapters: enumerated bases of regular open sets plus scan helpers.

Two spaces ship with the package.

``RationalLine`` enumerates bounded open rational intervals.  The canonical
order interleaves two deterministic streams:

* a completeness stream at every index divisible by 16, walking all
  rational intervals via the Calkin-Wilf order (left endpoint over all
  rationals, length over positive rationals, combined with the Cantor
  pairing) and skipping intervals that already appeared;
* a refinement stream everywhere else: six fixed seed intervals, then one
  pack per position of the diagonal walk over pairs (i, j), the same walk
  a schedule of blocks takes.  The pack for (i, j) with j >= 2 first emits
  one interval per signature class of the emissions made so far (the
  middle half of the class's leftmost component), and every pack for
  i <= 6 ends with a pair of intervals straddling the two endpoints of
  seed i at a width specific to (i, j) and shrinking fast enough in j to
  fit inside any residual gap left around those endpoints by the earlier
  middles.

The signature classes are maintained by a shadow insertion run over the
emitted intervals themselves.  They depend only on the set of emissions,
not on any insertion order, so they agree with the cells of any schedule
built over this basis whenever a whole initial segment has been inserted.
Emitting one interior interval per class instead of one per arrangement
gap, in the rhythm the diagonal walk consumes them, keeps the basis
growth linear in the number of cells a schedule has to drill, which is
what makes deep schedules affordable.  Rows past the sixth have no
straddler pairs, so schedules over this basis are practical up to six
levels deep; beyond that, scans must fall through to the completeness
stream.

Both streams skip duplicates, and the completeness stream visits every
interval at a slot bounded by its Calkin-Wilf rank, so the interleave is a
bijection onto all bounded rational intervals and ``index_of`` terminates.
The refinement stream exists purely to keep scans cheap: fresh straddlers
and class middles appear close to the scan frontier instead of at the
astronomic indices a plain pairing order would give them.

``CantorSpace`` enumerates binary cylinders in length-then-lexicographic
order; index k maps to the binary digits of k with the leading 1 removed,
so index 1 is the whole space.

Either adapter can be built with an injected prefix: explicitly listed
basis elements occupy indices 1..n and the canonical order continues after
them, skipping values equal to an injected element.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from .errors import (
    DuplicateInsertion,
    EmptyRegion,
    InfeasibleCover,
    InvariantViolation,
    NotABasisElement,
    ScanExhausted,
)
from .regions import (
    CantorRegion,
    LineRegion,
    cantor_closure_strictly_inside,
    cantor_complement,
    cantor_contains_point,
    cantor_meet,
    cantor_region,
    cantor_subset,
    cantor_union,
    interval,
    line_closure_strictly_inside,
    line_contains_point,
    line_meet,
    line_meet_exterior,
    line_region,
    line_regularize,
    line_subset,
    line_union,
)

DEFAULT_SCAN_CAP = 10**6


@dataclass(frozen=True)
class BasisHandle:
    """An enumerated basis element: its 1-based index and its region."""

    index: int
    region: object

    def __repr__(self) -> str:
        return f"BasisHandle({self.index}, {self.region!r})"


@dataclass(frozen=True)
class BoundaryDescriptor:
    """Explicit finite description of a basis element's boundary.

    On the line this is the pair of endpoints; on Cantor space cylinders
    are clopen and the tuple is empty.
    """

    points: tuple[Fraction, ...]

    @property
    def is_empty(self) -> bool:
        return not self.points


# -- Calkin-Wilf machinery ---------------------------------------------------


def cw_value(n: int) -> Fraction:
    """n-th positive rational in Calkin-Wilf order, 1-based."""
    if n < 1:
        raise InvariantViolation(f"Calkin-Wilf rank must be >= 1, got {n}")
    num, den = 1, 1
    for bit in bin(n)[3:]:
        if bit == "0":
            den = num + den
        else:
            num = num + den
    return Fraction(num, den)


def cw_rank(q: Fraction) -> int:
    """Inverse of ``cw_value``; q must be a positive rational."""
    if q <= 0:
        raise InvariantViolation(f"Calkin-Wilf rank needs q > 0, got {q}")
    num, den = q.numerator, q.denominator
    bits: list[str] = []
    while (num, den) != (1, 1):
        if num > den:
            bits.append("1")
            num -= den
        else:
            bits.append("0")
            den -= num
    return int("1" + "".join(reversed(bits)), 2)


def rational_value(m: int) -> Fraction:
    """m-th rational over all of Q: 0, then the Calkin-Wilf order with
    alternating signs (odd ranks positive, even ranks negative)."""
    if m < 0:
        raise InvariantViolation(f"rational rank must be >= 0, got {m}")
    if m == 0:
        return Fraction(0)
    if m % 2 == 1:
        return cw_value((m + 1) // 2)
    return -cw_value(m // 2)


def rational_rank(x: Fraction) -> int:
    if x == 0:
        return 0
    if x > 0:
        return 2 * cw_rank(x) - 1
    return 2 * cw_rank(-x)


def cantor_pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def cantor_unpair(n: int) -> tuple[int, int]:
    w = (isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


# -- base adapter -------------------------------------------------------------


class SpaceAdapter:
    """Shared enumeration cache and scan loops; subclasses supply the space.

    ``injected`` puts explicitly chosen basis elements at indices 1..n; the
    canonical order continues afterwards with injected values filtered out,
    so the full enumeration stays a bijection.
    """

    name: str = ""

    def __init__(self, injected: Sequence[object] = ()) -> None:
        for r in injected:
            self._validate_basis(r)
        if len(set(injected)) != len(injected):
            raise DuplicateInsertion("injected basis elements must be distinct")
        self._injected = tuple(injected)
        self._injected_pos = {r: i + 1 for i, r in enumerate(injected)}
        self._injected_set = set(injected)
        self._filtered: list[object] = []
        self._canonical_cursor = 0
        self._handles: dict[int, BasisHandle] = {}

    # subclass hooks ---------------------------------------------------

    def _validate_basis(self, region: object) -> None:
        raise NotImplementedError

    def _canonical_value(self, k: int) -> object:
        """k-th member of the canonical (injection-free) order."""
        raise NotImplementedError

    def _canonical_index(self, region: object) -> int:
        raise NotImplementedError

    def _canonical_at_most(self, region: object, p: int) -> bool:
        """Whether region's canonical position is <= p.

        Subclasses may answer without forcing a deep position; the default
        just computes it.
        """
        return self._canonical_index(region) <= p

    # enumeration -------------------------------------------------------

    @property
    def injected(self) -> tuple[object, ...]:
        return self._injected

    def with_injected(self, regions: Sequence[object]) -> "SpaceAdapter":
        return type(self)(injected=tuple(regions))

    def enumerate(self, index: int) -> BasisHandle:
        if index < 1:
            raise InvariantViolation(f"basis indices start at 1, got {index}")
        cached = self._handles.get(index)
        if cached is not None:
            return cached
        n = len(self._injected)
        if index <= n:
            handle = BasisHandle(index, self._injected[index - 1])
        else:
            while len(self._filtered) < index - n:
                self._canonical_cursor += 1
                candidate = self._canonical_value(self._canonical_cursor)
                if candidate not in self._injected_set:
                    self._filtered.append(candidate)
            handle = BasisHandle(index, self._filtered[index - n - 1])
        self._handles[index] = handle
        return handle

    def index_of(self, region: object) -> int:
        self._validate_basis(region)
        pos = self._injected_pos.get(region)
        if pos is not None:
            return pos
        p = self._canonical_index(region)
        skipped = sum(1 for r in self._injected if self._canonical_at_most(r, p))
        return len(self._injected) + p - skipped

    # region operations ---------------------------------------------------

    def meet(self, a: object, b: object) -> object:
        raise NotImplementedError

    def meet_exterior(self, a: object, v: BasisHandle) -> object:
        raise NotImplementedError

    def regularize(self, a: object) -> object:
        raise NotImplementedError

    def closure_strictly_inside(self, a: object, b: object) -> bool:
        raise NotImplementedError

    def boundary(self, v: BasisHandle) -> BoundaryDescriptor:
        raise NotImplementedError

    def union(self, a: object, b: object) -> object:
        raise NotImplementedError

    def union_all(self, regions: Iterable[object]) -> object:
        raise NotImplementedError

    def subset(self, a: object, b: object) -> bool:
        raise NotImplementedError

    def contains_point(self, a: object, point: object) -> bool:
        raise NotImplementedError

    @property
    def empty_region(self) -> object:
        raise NotImplementedError

    def parse_region(self, text: str) -> object:
        raise NotImplementedError

    def format_region(self, region: object) -> str:
        raise NotImplementedError

    # scans ----------------------------------------------------------------

    def find_hole(
        self,
        u: object,
        forbidden: frozenset[int] | set[int] = frozenset(),
        min_index: int = 1,
        scan_cap: int = DEFAULT_SCAN_CAP,
    ) -> BasisHandle:
        """Least-index basis element whose closure sits strictly inside u."""
        if getattr(u, "is_empty", False):
            raise EmptyRegion("find_hole needs a nonempty region")
        for k in range(min_index, min_index + scan_cap):
            if k in forbidden:
                continue
            h = self.enumerate(k)
            if self.closure_strictly_inside(h.region, u):
                return h
        raise ScanExhausted(
            f"no hole inside {u!r} within {scan_cap} indices from {min_index}"
        )

    def finite_subcover(
        self,
        points: Sequence[object],
        constraint: object | None = None,
        forbidden: frozenset[int] | set[int] = frozenset(),
        min_index: int = 1,
        scan_cap: int = DEFAULT_SCAN_CAP,
    ) -> tuple[BasisHandle, ...]:
        """Greedy minimal-index cover of finitely many points.

        Every chosen element must lie inside ``constraint`` when one is
        given; ``None`` means unconstrained, which is how first-level covers
        run because the whole space is not itself a region.
        """
        if constraint is not None:
            for p in points:
                if not self.contains_point(constraint, p):
                    raise InfeasibleCover(
                        f"point {p!r} lies outside the constraint region"
                    )
        uncovered = list(points)
        chosen: list[BasisHandle] = []
        if not uncovered:
            return ()
        for k in range(min_index, min_index + scan_cap):
            if k in forbidden:
                continue
            h = self.enumerate(k)
            if constraint is not None and not self.subset(h.region, constraint):
                continue
            hit = [p for p in uncovered if self.contains_point(h.region, p)]
            if not hit:
                continue
            chosen.append(h)
            uncovered = [p for p in uncovered if p not in hit]
            if not uncovered:
                return tuple(chosen)
        raise ScanExhausted(
            f"cover of {points!r} incomplete after {scan_cap} indices"
        )


# -- rational line ------------------------------------------------------------

_SEEDS = (
    (Fraction(0), Fraction(1)),
    (Fraction(1), Fraction(2)),
    (Fraction(-1), Fraction(0)),
    (Fraction(1, 4), Fraction(3, 4)),
    (Fraction(-3, 4), Fraction(-1, 4)),
    (Fraction(5, 4), Fraction(7, 4)),
)

def _straddle_width(position: int) -> Fraction:
    """Half-width of the straddler pair in the pack at this walk position.

    Each pack of middles quarters the gap flanking a seed endpoint, so a
    straddler emitted at position P fits inside the gap left by one
    emitted at position Q < P as long as d(P) < d(Q) * 4**(Q-P), no
    matter which rows the two packs belong to (endpoints 0 and 1 are
    shared across rows).  d(P) = 4**(-P*P) satisfies that for every pair
    P > Q because P*P - P is strictly increasing.
    """
    return Fraction(1, 4 ** (position * position))


_COMPLETENESS_STRIDE = 16


class _LineStream:
    """Lazy canonical emission order for the rational line.

    Slot k emits from the completeness stream when 16 divides k and from
    the refinement stream otherwise.  Both skip regions already emitted,
    and every queue refresh is a pure function of the emissions made so
    far, so the order is deterministic.
    """

    def __init__(self, adapter: "RationalLine") -> None:
        self._adapter = adapter
        self._emitted: list[LineRegion] = []
        self._position: dict[LineRegion, int] = {}
        self._seed_queue = [interval(a, b) for a, b in _SEEDS]
        self._diag_i = 0
        self._diag_j = 0
        self._pack_no = 0
        self._part_queue: list[LineRegion] = []
        self._b_rank = 1
        self._shadow = None

    def __len__(self) -> int:
        return len(self._emitted)

    def value(self, k: int) -> LineRegion:
        while len(self._emitted) < k:
            self._emit_next()
        return self._emitted[k - 1]

    def position(self, region: LineRegion) -> int | None:
        return self._position.get(region)

    def _emit(self, region: LineRegion) -> None:
        self._emitted.append(region)
        self._position[region] = len(self._emitted)
        self._shadow_builder().insert(
            BasisHandle(len(self._emitted), region)
        )

    def _shadow_builder(self):
        # imported late: stages imports this module
        if self._shadow is None:
            from .stages import StageBuilder

            self._shadow = StageBuilder(self._adapter)
        return self._shadow

    def _emit_next(self) -> None:
        if (len(self._emitted) + 1) % _COMPLETENESS_STRIDE == 0:
            self._emit(self._next_completeness())
        else:
            self._emit(self._next_refinement())

    def _next_completeness(self) -> LineRegion:
        while True:
            i, j = cantor_unpair(self._b_rank - 1)
            self._b_rank += 1
            left = rational_value(i)
            cand = interval(left, left + cw_value(j + 1))
            if cand not in self._position:
                return cand

    def _next_refinement(self) -> LineRegion:
        while True:
            if self._seed_queue:
                cand = self._seed_queue.pop(0)
            else:
                while not self._part_queue:
                    self._advance_pack()
                cand = self._part_queue.pop(0)
            if cand not in self._position:
                return cand

    def _advance_pack(self) -> None:
        """Queue the pack for the next position of the diagonal walk."""
        i, j = self._diag_i, self._diag_j
        if i == 0:
            i, j = 1, 1
        elif i > 1:
            i, j = i - 1, j + 1
        else:
            i, j = j + 1, 1
        self._diag_i, self._diag_j = i, j
        self._pack_no += 1
        pack: list[LineRegion] = []
        if j >= 2:
            pack.extend(self._class_middles())
        if i <= len(_SEEDS):
            d = _straddle_width(self._pack_no)
            for t in _SEEDS[i - 1]:
                pack.append(interval(t - d, t + d))
        self._part_queue = pack

    def _class_middles(self) -> list[LineRegion]:
        """Middle half of the leftmost component of every signature class."""
        out = []
        for cell in self._shadow_builder().cells.values():
            lo, hi = cell.region.parts[0]
            w = (hi - lo) / 4
            out.append((lo, interval(lo + w, hi - w)))
        out.sort(key=lambda pair: pair[0])
        return [region for _, region in out]

    def rank_bound(self, region: LineRegion) -> int:
        """Completeness rank of region; its slot is at most 16 times this."""
        (a, b) = region.parts[0]
        return cantor_pair(rational_rank(a), cw_rank(b - a) - 1) + 1

    def index_of(self, region: LineRegion) -> int:
        pos = self._position.get(region)
        if pos is not None:
            return pos
        stop = self.rank_bound(region)
        while self._b_rank <= stop:
            self._emit_next()
            pos = self._position.get(region)
            if pos is not None:
                return pos
        pos = self._position.get(region)
        if pos is None:
            raise InvariantViolation(
                f"canonical line order failed to reach {region!r}"
            )
        return pos


class RationalLine(SpaceAdapter):
    """Bounded open rational intervals on the line."""

    name = "rational-line"

    def __init__(self, injected: Sequence[object] = ()) -> None:
        super().__init__(injected)
        self._stream = _LineStream(self)

    def _validate_basis(self, region: object) -> None:
        if not isinstance(region, LineRegion) or len(region.parts) != 1:
            raise NotABasisElement(
                f"line basis elements are single bounded intervals, got {region!r}"
            )

    def _canonical_value(self, k: int) -> object:
        return self._stream.value(k)

    def _canonical_index(self, region: object) -> int:
        return self._stream.index_of(region)

    def _canonical_at_most(self, region: object, p: int) -> bool:
        # index_of resolves the query's position first, which extends the
        # stream past p; injected regions absent from the first p slots
        # therefore sit strictly beyond p and need no deep unroll
        pos = self._stream.position(region)
        return pos is not None and pos <= p

    def meet(self, a: object, b: object) -> object:
        return line_meet(a, b)

    def meet_exterior(self, a: object, v) -> object:
        return line_meet_exterior(a, v.region if isinstance(v, BasisHandle) else v)

    def regularize(self, a: object) -> object:
        return line_regularize(a)

    def closure_strictly_inside(self, a: object, b: object) -> bool:
        return line_closure_strictly_inside(a, b)

    def boundary(self, v: BasisHandle) -> BoundaryDescriptor:
        (a, b) = v.region.parts[0]
        return BoundaryDescriptor((a, b))

    def union(self, a: object, b: object) -> object:
        return line_union(a, b)

    def union_all(self, regions: Iterable[object]) -> object:
        return line_region(p for r in regions for p in r.parts)

    def subset(self, a: object, b: object) -> bool:
        return line_subset(a, b)

    def contains_point(self, a: object, point: object) -> bool:
        return line_contains_point(a, point)

    @property
    def empty_region(self) -> object:
        return line_region(())

    def parse_region(self, text: str) -> object:
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise NotABasisElement(f"expected (p,q), got {text!r}")
        try:
            lo, hi = (Fraction(part.strip()) for part in body[1:-1].split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise NotABasisElement(f"bad interval literal {text!r}: {exc}") from exc
        if not lo < hi:
            raise NotABasisElement(f"interval needs p < q, got {text!r}")
        return interval(lo, hi)

    def format_region(self, region: object) -> str:
        return " u ".join(f"({a},{b})" for a, b in region.parts) or "(empty)"


# -- Cantor space --------------------------------------------------------------


class CantorSpace(SpaceAdapter):
    """Binary cylinders of the Cantor space, length-then-lexicographic."""

    name = "cantor"

    def _validate_basis(self, region: object) -> None:
        if not isinstance(region, CantorRegion) or len(region.prefixes) != 1:
            raise NotABasisElement(
                f"Cantor basis elements are single cylinders, got {region!r}"
            )

    def _canonical_value(self, k: int) -> object:
        return cantor_region((bin(k)[3:],))

    def _canonical_index(self, region: object) -> int:
        return int("1" + region.prefixes[0], 2)

    def meet(self, a: object, b: object) -> object:
        return cantor_meet(a, b)

    def meet_exterior(self, a: object, v) -> object:
        w = v.region if isinstance(v, BasisHandle) else v
        return cantor_meet(a, cantor_complement(w))

    def regularize(self, a: object) -> object:
        # cylinders are clopen, every region already equals the interior of
        # its closure
        return a

    def closure_strictly_inside(self, a: object, b: object) -> bool:
        return cantor_closure_strictly_inside(a, b)

    def boundary(self, v: BasisHandle) -> BoundaryDescriptor:
        return BoundaryDescriptor(())

    def union(self, a: object, b: object) -> object:
        return cantor_union(a, b)

    def union_all(self, regions: Iterable[object]) -> object:
        return cantor_region(p for r in regions for p in r.prefixes)

    def subset(self, a: object, b: object) -> bool:
        return cantor_subset(a, b)

    def contains_point(self, a: object, point: object) -> bool:
        return cantor_contains_point(a, point)

    @property
    def empty_region(self) -> object:
        return cantor_region(())

    def parse_region(self, text: str) -> object:
        body = text.strip()
        if body == "-":
            return cantor_region(("",))
        if body and set(body) <= {"0", "1"}:
            return cantor_region((body,))
        raise NotABasisElement(
            f"Cantor literals are 0/1 words or '-' for the whole space, got {text!r}"
        )

    def format_region(self, region: object) -> str:
        if not region.prefixes:
            return "(empty)"
        return " u ".join(p if p else "-" for p in region.prefixes)


ADAPTERS = {
    RationalLine.name: RationalLine,
    CantorSpace.name: CantorSpace,
}


def make_adapter(name: str, injected: Iterable[object] = ()) -> SpaceAdapter:
    try:
        cls = ADAPTERS[name]
    except KeyError:
        raise NotABasisElement(f"unknown adapter {name!r}") from None
    return cls(injected=tuple(injected))

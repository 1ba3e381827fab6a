"""Boundary-annihilating insertion schedules.

``build_schedule`` arranges the basis into blocks R(i, j) walked in diagonal
order R(1,1), R(2,1), R(1,2), R(3,1), R(2,2), R(1,3), ...  Block (i, 1)
selects a finite cover of the boundary of V_i.  Block (i, j) for j >= 2
first selects one hole per current cell (a basis element whose closure sits
strictly inside the cell) and then covers the boundary of V_i again, this
time inside the previous cover minus the hole closures.  Every block also
sweeps in the unselected indices of its contiguous range, so the flattened
schedule is a permutation of an initial segment of the basis.

Within a block the holes are inserted first, in ascending index order, and
the cover and remainder indices follow, merged ascending.  Holes must land
before anything else can split their host cells: that is what makes the
exact identity "mass outside the hole closures = half the cover mass" hold,
which the boundary certificates rely on.

Ranges are contiguous: block bound g is the largest selected index (never
below the previous bound, and at least i so V_i itself always enters the
stream no later than its first cover block).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .adapters import BasisHandle, DEFAULT_SCAN_CAP, SpaceAdapter
from .errors import ScanExhausted, StageTooEarly
from .stages import RingElement, Stage, StageBuilder, StepRecord, decompose


@dataclass(frozen=True)
class ScheduleBlock:
    """One block R(i, j): selected families and its contiguous index range.

    ``cover``, ``holes`` and ``remainder`` are original basis indices in
    ascending order; ``hole_hosts`` pairs each hole index with the id of
    the cell it was drilled into; ``g`` is the block's range bound, and
    ``stream_end`` the stage index reached once the block is inserted.
    """

    i: int
    j: int
    cover: tuple[int, ...]
    holes: tuple[int, ...]
    remainder: tuple[int, ...]
    g: int
    stream_end: int
    cover_last_position: int
    hole_hosts: tuple[tuple[int, int], ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class Schedule:
    """All blocks of a finished run plus the flattened insertion stream."""

    adapter: SpaceAdapter
    depth: int
    scan_cap: int
    blocks: tuple[ScheduleBlock, ...]
    stream: tuple[BasisHandle, ...]

    def block(self, i: int, j: int) -> ScheduleBlock:
        for b in self.blocks:
            if b.i == i and b.j == j:
                return b
        raise StageTooEarly(
            f"schedule of depth {self.depth} has no block ({i},{j})"
        )

    @property
    def permutation(self) -> tuple[int, ...]:
        return tuple(h.index for h in self.stream)

    def cover_handles(self, i: int, j: int) -> tuple[BasisHandle, ...]:
        return tuple(self.adapter.enumerate(k) for k in self.block(i, j).cover)

    def hole_handles(self, i: int, j: int) -> tuple[BasisHandle, ...]:
        return tuple(self.adapter.enumerate(k) for k in self.block(i, j).holes)


class Trace:
    """Stage sequence of a schedule run.

    Full snapshots are kept at block boundaries; any other stage is rebuilt
    on demand by replaying the stream from the nearest snapshot.  Step
    records carry the exact per-insertion mass accounting for the whole
    run, so conservation can be audited without materializing every stage.
    """

    def __init__(
        self,
        adapter: SpaceAdapter,
        stream: tuple[BasisHandle, ...],
        records: tuple[StepRecord, ...],
        snapshots: dict[int, Stage],
    ) -> None:
        self.adapter = adapter
        self.stream = stream
        self.records = records
        self._snapshots = snapshots

    def __len__(self) -> int:
        return len(self.stream)

    @property
    def final(self) -> Stage:
        return self._snapshots[len(self.stream)]

    @property
    def snapshot_positions(self) -> tuple[int, ...]:
        return tuple(sorted(self._snapshots))

    def stage_at(self, position: int) -> Stage:
        if position < 1 or position > len(self.stream):
            raise StageTooEarly(
                f"trace has stages 1..{len(self.stream)}, asked for {position}"
            )
        cached = self._snapshots.get(position)
        if cached is not None:
            return cached
        base = max((p for p in self._snapshots if p < position), default=0)
        if base == 0:
            builder = StageBuilder(self.adapter)
        else:
            builder = StageBuilder.from_stage(self._snapshots[base])
        for h in self.stream[base:position]:
            builder.insert(h)
        return builder.snapshot()

    def stages(self, start: int = 1, stop: int | None = None):
        """Yield consecutive stages; meant for short traces."""
        stop = len(self.stream) if stop is None else stop
        builder = StageBuilder(self.adapter)
        for position, h in enumerate(self.stream[:stop], start=1):
            builder.insert(h)
            if position >= start:
                yield builder.snapshot()


def _diagonal_blocks(depth: int) -> list[tuple[int, int]]:
    out = []
    for s in range(2, depth + 2):
        for j in range(1, s):
            out.append((s - j, j))
    return out


def _hole_sweep(
    adapter: SpaceAdapter,
    builder: StageBuilder,
    min_index: int,
    scan_cap: int,
) -> tuple[tuple[BasisHandle, ...], tuple[tuple[int, int], ...]]:
    """One hole per current cell, scanning indices once, ascending.

    A candidate's closure fits strictly inside at most one cell because
    cells are disjoint, so assigning each admissible candidate to its host
    as the scan walks upward selects exactly the least admissible index for
    every cell, the same family a cell-by-cell rescan would pick.
    """
    pending = set(builder.cells)
    found: dict[int, BasisHandle] = {}
    k = min_index
    while pending:
        if k >= min_index + scan_cap:
            raise ScanExhausted(
                f"{len(pending)} cells still holeless after {scan_cap} indices"
            )
        h = adapter.enumerate(k)
        host = builder.locate_host(h.region)
        if host is not None and host in pending:
            found[host] = h
            pending.discard(host)
        k += 1
    by_index = sorted(found.items(), key=lambda kv: kv[1].index)
    pairs = tuple((handle.index, host) for host, handle in by_index)
    handles = tuple(handle for _, handle in by_index)
    return handles, pairs


def build_schedule(
    adapter: SpaceAdapter,
    depth: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> tuple[Schedule, Trace]:
    """Run the diagonal block construction to the given depth."""
    builder = StageBuilder(adapter)
    blocks: list[ScheduleBlock] = []
    stream: list[BasisHandle] = []
    snapshots: dict[int, Stage] = {}
    prev_cover_region: dict[int, object] = {}
    frontier = 0
    for i, j in _diagonal_blocks(depth):
        if j == 1:
            v = adapter.enumerate(i)
            points = adapter.boundary(v).points
            cover = (
                adapter.finite_subcover(
                    points, None, frozenset(), frontier + 1, scan_cap
                )
                if points
                else ()
            )
            holes: tuple[BasisHandle, ...] = ()
            hole_hosts: tuple[tuple[int, int], ...] = ()
        else:
            holes, hole_hosts = _hole_sweep(
                adapter, builder, frontier + 1, scan_cap
            )
            constraint = prev_cover_region[i]
            for h in holes:
                constraint = adapter.meet_exterior(constraint, h)
            v = adapter.enumerate(i)
            points = adapter.boundary(v).points
            cover = (
                adapter.finite_subcover(
                    points,
                    constraint,
                    frozenset(h.index for h in holes),
                    frontier + 1,
                    scan_cap,
                )
                if points
                else ()
            )
        hole_set = {h.index for h in holes}
        cover_set = {h.index for h in cover}
        selected = hole_set | cover_set
        g = max([frontier, i, *selected])
        remainder = tuple(
            k for k in range(frontier + 1, g + 1) if k not in selected
        )
        order = sorted(hole_set) + sorted(cover_set | set(remainder))
        cover_last = 0
        for k in order:
            handle = adapter.enumerate(k)
            builder.insert(handle)
            stream.append(handle)
            if k in cover_set:
                cover_last = len(stream)
        blocks.append(
            ScheduleBlock(
                i=i,
                j=j,
                cover=tuple(sorted(cover_set)),
                holes=tuple(sorted(hole_set)),
                remainder=remainder,
                g=g,
                stream_end=len(stream),
                cover_last_position=cover_last,
                hole_hosts=hole_hosts,
            )
        )
        prev_cover_region[i] = adapter.union_all(h.region for h in cover)
        snapshots[len(stream)] = builder.snapshot()
        frontier = g
    schedule = Schedule(
        adapter=adapter,
        depth=depth,
        scan_cap=scan_cap,
        blocks=tuple(blocks),
        stream=tuple(stream),
    )
    trace = Trace(adapter, tuple(stream), tuple(builder.records), snapshots)
    return schedule, trace


def cover_union(
    schedule: Schedule, i: int, j: int, stage: Stage
) -> RingElement:
    """The union of the (i, j) cover as a ring element of the given stage."""
    block = schedule.block(i, j)
    if stage.index < block.cover_last_position:
        raise StageTooEarly(
            f"cover of block ({i},{j}) is complete only at stage "
            f"{block.cover_last_position}, got {stage.index}"
        )
    region = schedule.adapter.union_all(
        h.region for h in schedule.cover_handles(i, j)
    )
    return decompose(region, stage)


def permuted_stream(schedule: Schedule) -> tuple[BasisHandle, ...]:
    """The insertion order as basis handles; a permutation of 1..g(depth)."""
    return schedule.stream

"""Insertion engine: cells, signatures, splits, ring elements."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadicmeasure.adapters import BasisHandle, make_adapter
from dyadicmeasure.dyadic import DyadicMass
from dyadicmeasure.errors import (
    DuplicateInsertion,
    NotRepresentable,
    StageMismatch,
    UnknownCell,
)
from dyadicmeasure.masses import kappa
from dyadicmeasure.regions import cantor_region, interval
from dyadicmeasure.stages import (
    RingElement,
    StageBuilder,
    build_stages,
    classify,
    decompose,
    init_stage,
    refine,
    ring_difference,
    ring_union,
)

T1_INJECTED = [interval(0, 2), interval(1, 3), interval(F(9, 4), F(11, 4))]


@pytest.fixture(scope="module")
def t1():
    adapter = make_adapter("rational-line", injected=T1_INJECTED)
    builder = StageBuilder(adapter)
    stages = []
    for i in (1, 2, 3):
        builder.insert(adapter.enumerate(i))
        stages.append(builder.snapshot())
    return adapter, builder, stages


# -- stage progression --------------------------------------------------------


def test_root_stage(t1):
    adapter, _, stages = t1
    s1 = stages[0]
    assert s1.index == 1
    (cell,) = s1.cells.values()
    assert cell.region == interval(0, 2)
    assert cell.mass == DyadicMass.pow2(1)
    assert cell.kind == "root"
    assert cell.parent_id is None
    assert s1.total_mass == DyadicMass.pow2(1)
    assert s1.boundary_points == frozenset({F(0), F(2)})


def test_second_stage_split_and_grant(t1):
    adapter, _, stages = t1
    s2 = stages[1]
    by_region = {adapter.format_region(c.region): c for c in s2.cells.values()}
    assert set(by_region) == {"(1,2)", "(0,1)", "(2,3)"}
    assert by_region["(1,2)"].kind == "split"
    assert by_region["(1,2)"].parent_id == 1
    assert by_region["(0,1)"].parent_id == 1
    assert by_region["(2,3)"].kind == "new_region"
    assert by_region["(2,3)"].parent_id is None
    assert all(c.mass == DyadicMass.pow2(2) for c in s2.cells.values())
    assert s2.total_mass == DyadicMass(3, 2)
    assert s2.boundary_points == frozenset({F(0), F(1), F(2), F(3)})


def test_third_stage_cells(t1):
    adapter, _, stages = t1
    s3 = stages[2]
    got = {
        cid: (adapter.format_region(c.region), str(c.mass), c.parent_id, c.birth_stage)
        for cid, c in sorted(s3.cells.items())
    }
    assert got == {
        2: ("(1,2)", "1/2^2", 1, 2),
        3: ("(0,1)", "1/2^2", 1, 2),
        5: ("(9/4,11/4)", "1/2^3", 4, 3),
        6: ("(2,9/4) u (11/4,3)", "1/2^3", 4, 3),
    }
    assert s3.total_mass == DyadicMass(3, 2)
    assert s3.boundary_points == frozenset(
        {F(0), F(1), F(2), F(3), F(9, 4), F(11, 4)}
    )


def test_signatures(t1):
    _, _, stages = t1
    s3 = stages[2]
    assert s3.signature_of(2) == (True, True, False)
    assert s3.signature_of(3) == (True, False, False)
    assert s3.signature_of(5) == (False, True, True)
    assert s3.signature_of(6) == (False, True, False)
    assert s3.cell_for_signature((False, True, True)).cell_id == 5


def test_signature_lookup_errors(t1):
    _, _, stages = t1
    s3 = stages[2]
    with pytest.raises(UnknownCell):
        s3.signature_of(99)
    with pytest.raises(UnknownCell):
        s3.cell_for_signature((True, True, True))


def test_step_records(t1):
    _, builder, _ = t1
    rows = [
        (r.position, r.basis_index, str(r.grant) if r.grant else None, r.splits,
         str(r.total_after))
        for r in builder.records
    ]
    assert rows == [
        (1, 1, "1/2^1", 0, "1/2^1"),
        (2, 2, "1/2^2", 1, "3/2^2"),
        (3, 3, None, 1, "3/2^2"),
    ]


def test_refine_is_pure(t1):
    adapter, _, _ = t1
    fresh = make_adapter("rational-line", injected=T1_INJECTED)
    s1 = init_stage(fresh, fresh.enumerate(1))
    s2 = refine(s1, fresh.enumerate(2))
    assert len(s1.cells) == 1
    assert len(s2.cells) == 3
    assert s2.index == 2


def test_build_stages_matches_refine_chain():
    adapter = make_adapter("rational-line", injected=T1_INJECTED)
    handles = [adapter.enumerate(i) for i in (1, 2, 3)]
    chained = build_stages(adapter, handles)
    assert [s.index for s in chained] == [1, 2, 3]
    regions = {c.region for c in chained[-1].cells.values()}
    adapter2 = make_adapter("rational-line", injected=T1_INJECTED)
    s = init_stage(adapter2, adapter2.enumerate(1))
    for h in handles[1:]:
        s = refine(s, h)
    assert {c.region for c in s.cells.values()} == regions


def test_builder_continues_from_snapshot(t1):
    adapter, _, stages = t1
    resumed = StageBuilder.from_stage(stages[1])
    resumed.insert(adapter.enumerate(3))
    s3 = resumed.snapshot()
    assert {c.region for c in s3.cells.values()} == {
        c.region for c in stages[2].cells.values()
    }
    assert s3.total_mass == stages[2].total_mass
    with pytest.raises(DuplicateInsertion):
        resumed.insert(adapter.enumerate(3))


def test_builder_count(t1):
    _, builder, _ = t1
    assert builder.count == 3


# -- classify -----------------------------------------------------------------


def test_classify_kinds(t1):
    adapter, _, stages = t1
    s3 = stages[2]
    v3 = adapter.enumerate(3)
    assert classify(s3.cells[2], v3, adapter).kind == "persist_exterior"
    assert classify(s3.cells[5], BasisHandle(99, interval(2, 3)), adapter).kind == (
        "persist_inside"
    )
    out = classify(s3.cells[6], BasisHandle(99, interval(2, F(5, 2))), adapter)
    assert out.kind == "split"
    assert out.in_region == interval(2, F(9, 4))
    assert out.ext_region == interval(F(11, 4), 3)


# -- ring elements ------------------------------------------------------------


def test_decompose_known_regions(t1):
    adapter, _, stages = t1
    s3 = stages[2]
    d = decompose(interval(0, 2), s3)
    assert sorted(d.open_cells) == [2, 3]
    assert d.boundary_points == frozenset({F(1)})
    assert kappa(s3, d) == DyadicMass.pow2(1)
    d2 = decompose(interval(1, 3), s3)
    assert sorted(d2.open_cells) == [2, 5, 6]
    assert d2.boundary_points == frozenset({F(2), F(9, 4), F(11, 4)})
    assert kappa(s3, d2) == DyadicMass.pow2(1)


def test_decompose_rejects_unrepresentable(t1):
    _, _, stages = t1
    with pytest.raises(NotRepresentable):
        decompose(interval(0, F(1, 2)), stages[2])


def test_ring_union_and_difference(t1):
    _, _, stages = t1
    s3 = stages[2]
    d = decompose(interval(0, 2), s3)
    d2 = decompose(interval(1, 3), s3)
    u = ring_union(d, d2)
    assert sorted(u.open_cells) == [2, 3, 5, 6]
    assert u.boundary_points == frozenset({F(1), F(2), F(9, 4), F(11, 4)})
    assert kappa(s3, u) == DyadicMass(3, 2)
    diff = ring_difference(d2, d)
    assert sorted(diff.open_cells) == [5, 6]
    assert kappa(s3, diff) == DyadicMass.pow2(2)


def test_ring_ops_demand_matching_stage(t1):
    _, _, stages = t1
    d2 = decompose(interval(0, 2), stages[1])
    d3 = decompose(interval(0, 2), stages[2])
    with pytest.raises(StageMismatch):
        ring_union(d2, d3)
    with pytest.raises(StageMismatch):
        ring_difference(d2, d3)


def test_ring_element_views(t1):
    _, _, stages = t1
    s3 = stages[2]
    d = decompose(interval(0, 2), s3)
    assert d.open_part(s3) == frozenset({(True, True, False), (True, False, False)})
    assert d.open_region(s3) == stages[2].adapter.union(
        interval(0, 1), interval(1, 2)
    )
    assert not d.is_empty
    empty = RingElement(s3.index, frozenset(), frozenset())
    assert empty.is_empty


def test_locate_host(t1):
    _, builder, _ = t1
    assert builder.locate_host(interval(F(7, 3), F(5, 2))) == 5
    assert builder.locate_host(interval(F(1, 4), F(1, 2))) == 3
    # closure containment must be strict
    assert builder.locate_host(interval(F(9, 4), F(5, 2))) is None
    assert builder.locate_host(interval(0, 3)) is None


# -- cantor space -------------------------------------------------------------


def test_cantor_three_stages():
    c = make_adapter("cantor")
    builder = StageBuilder(c)
    for i in (1, 2, 3):
        builder.insert(c.enumerate(i))
    s3 = builder.snapshot()
    got = {
        cid: (c.format_region(x.region), str(x.mass), x.kind)
        for cid, x in sorted(s3.cells.items())
    }
    # splitting the root grants nothing; inserting '1' only persists
    assert got == {2: ("0", "1/2^2", "split"), 3: ("1", "1/2^2", "split")}
    assert s3.total_mass == DyadicMass.pow2(1)
    assert s3.boundary_points == frozenset()
    rows = [
        (r.position, str(r.grant) if r.grant else None, r.splits)
        for r in builder.records
    ]
    assert rows == [(1, "1/2^1", 0), (2, None, 1), (3, None, 0)]
    assert s3.signature_of(2) == (True, True, False)
    assert s3.signature_of(3) == (True, False, True)


# -- order invariants ---------------------------------------------------------


def _line_prefix_regions(n):
    base = make_adapter("rational-line")
    return [base.enumerate(i).region for i in range(1, n + 1)]


@settings(max_examples=25, deadline=None)
@given(st.permutations(tuple(range(6))))
def test_insertion_order_keeps_stage_sound(order):
    regions = _line_prefix_regions(6)
    shuffled = [regions[i] for i in order]
    adapter = make_adapter("rational-line", injected=shuffled)
    builder = StageBuilder(adapter)
    for i in range(1, 7):
        builder.insert(adapter.enumerate(i))
        stage = builder.snapshot()
        k = stage.index
        # conservation: totals stay under 1 - 2^-k
        assert stage.total_mass.as_fraction() <= 1 - F(1, 2**k)
        assert all(not c.mass.is_zero for c in stage.cells.values())
        cells = list(stage.cells.values())
        for a in range(len(cells)):
            for b in range(a + 1, len(cells)):
                assert adapter.meet(cells[a].region, cells[b].region).is_empty
        # signatures are a bijection onto cells
        sigs = {stage.signature_of(cid) for cid in stage.cells}
        assert len(sigs) == len(stage.cells)

"""Clopen cylinder algebra, checked against finite word expansion.

Every region over prefixes of length <= L is a union of words of length
exactly L, so expanding both sides to depth L is a complete oracle, not a
sample.
"""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadicmeasure.errors import InvariantViolation
from dyadicmeasure.regions import (
    CANTOR_ALL,
    CANTOR_EMPTY,
    cantor_closure_strictly_inside,
    cantor_complement,
    cantor_contains_point,
    cantor_meet,
    cantor_minus,
    cantor_region,
    cantor_subset,
    cantor_union,
)


def words(depth):
    return {format(k, f"0{depth}b") for k in range(1 << depth)} if depth else {""}


def expand(region, depth):
    return {w for w in words(depth) if any(w.startswith(p) for p in region.prefixes)}


def test_canonicalize_merges_siblings():
    assert cantor_region(["00", "01"]) == cantor_region(["0"])
    assert cantor_region(["00", "01", "10", "11"]) == CANTOR_ALL
    assert cantor_region(["0", "00"]) == cantor_region(["0"])


def test_canonicalize_cascades():
    # sibling merge exposes another merge
    assert cantor_region(["000", "001", "01", "1"]) == CANTOR_ALL


def test_rejects_bad_alphabet():
    with pytest.raises(InvariantViolation):
        cantor_region(["02"])


def test_complement_examples():
    assert cantor_complement(cantor_region(["0"])) == cantor_region(["1"])
    assert cantor_complement(CANTOR_ALL) == CANTOR_EMPTY
    assert cantor_complement(CANTOR_EMPTY) == CANTOR_ALL
    assert cantor_complement(cantor_region(["01"])) == cantor_region(["00", "1"])


def test_meet_prefix_relation():
    assert cantor_meet(cantor_region(["0"]), cantor_region(["01"])) == cantor_region(
        ["01"]
    )
    assert cantor_meet(cantor_region(["0"]), cantor_region(["1"])).is_empty


def test_subset_and_strictly_inside():
    assert cantor_subset(cantor_region(["01"]), cantor_region(["0"]))
    assert not cantor_subset(cantor_region(["0"]), cantor_region(["01"]))
    assert cantor_closure_strictly_inside(cantor_region(["01"]), cantor_region(["0"]))
    # equality is not strict
    assert not cantor_closure_strictly_inside(cantor_region(["0"]), cantor_region(["0"]))
    assert not cantor_closure_strictly_inside(cantor_region(["0"]), CANTOR_EMPTY)


def test_contains_point_needs_long_words():
    r = cantor_region(["01"])
    assert cantor_contains_point(r, "010000")
    assert not cantor_contains_point(r, "110000")


prefixes = st.lists(
    st.text(alphabet="01", min_size=0, max_size=4), min_size=0, max_size=4
)


@given(prefixes)
def test_expansion_round_trip(ps):
    r = cantor_region(ps)
    # canonicalization is exactly "same depth-5 word set"
    assert cantor_region(sorted(expand(r, 5))) == r


@given(prefixes, prefixes)
def test_meet_is_intersection(ps, qs):
    x, y = cantor_region(ps), cantor_region(qs)
    assert expand(cantor_meet(x, y), 5) == expand(x, 5) & expand(y, 5)


@given(prefixes, prefixes)
def test_union_is_union(ps, qs):
    x, y = cantor_region(ps), cantor_region(qs)
    assert expand(cantor_union(x, y), 5) == expand(x, 5) | expand(y, 5)


@given(prefixes)
def test_complement_is_complement(ps):
    x = cantor_region(ps)
    assert expand(cantor_complement(x), 5) == words(5) - expand(x, 5)


@given(prefixes, prefixes)
def test_minus_is_difference(ps, qs):
    x, y = cantor_region(ps), cantor_region(qs)
    assert expand(cantor_minus(x, y), 5) == expand(x, 5) - expand(y, 5)


@given(prefixes, prefixes)
def test_subset_matches_expansion(ps, qs):
    x, y = cantor_region(ps), cantor_region(qs)
    assert cantor_subset(x, y) == (expand(x, 5) <= expand(y, 5))

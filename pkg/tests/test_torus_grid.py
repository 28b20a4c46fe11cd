"""Tests for grid geometry, cycle winding and disk interiors."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from toroidal_matchings.lib.errors import InvalidInputError
from toroidal_matchings.lib.torus_grid import (
    CornerParity,
    Direction,
    GridCycle,
    GridEdge,
    Node,
    TorusDims,
    corners,
    disk_interior,
    edge_between,
    has_uniform_corner_parity,
    in_layer_a,
    in_layer_b,
    interior_components,
    is_contractible,
    layer_parities,
    neighbors,
    random_uniform_parity_cycle,
    rectangle,
    uniform_parity_rectangles,
    winding,
)

T44 = TorusDims(m=4, n=4)
T66 = TorusDims(m=6, n=6)
T88 = TorusDims(m=8, n=8)


def _cycle(dims: TorusDims, *points: tuple[int, int]) -> GridCycle:
    return GridCycle(dims, tuple(Node(*p) for p in points))


@pytest.mark.parametrize(("m", "n"), [(5, 4), (4, 7), (2, 4), (4, 2), (0, 6)])
def test_dims_rejects_odd_or_small_sides(m: int, n: int) -> None:
    with pytest.raises(ValidationError):
        TorusDims(m=m, n=n)


def test_dims_str() -> None:
    assert str(TorusDims(m=4, n=6)) == "T_{4,6}"


@pytest.mark.parametrize(
    ("dims", "node", "expected"),
    [
        (TorusDims(m=4, n=6), (0, 0), {(1, 0), (3, 0), (0, 1), (0, 5)}),
        (TorusDims(m=4, n=6), (2, 3), {(1, 3), (3, 3), (2, 2), (2, 4)}),
        (T44, (3, 3), {(2, 3), (0, 3), (3, 2), (3, 0)}),
    ],
)
def test_neighbors(dims: TorusDims, node: tuple[int, int], expected: set) -> None:
    assert neighbors(dims, Node(*node)) == {Node(*p) for p in expected}


def test_neighbors_rejects_out_of_range_node() -> None:
    with pytest.raises(InvalidInputError):
        neighbors(T44, Node(4, 0))


def test_node_colour() -> None:
    assert Node(0, 0).is_black
    assert not Node(0, 1).is_black
    assert Node(3, 1).is_black


class TestEdges:
    def test_canonical_form_is_unique(self) -> None:
        assert edge_between(T44, Node(0, 3), Node(0, 0)) == GridEdge(Node(0, 3), Direction.HORIZONTAL)
        assert edge_between(T44, Node(0, 0), Node(0, 3)) == GridEdge(Node(0, 3), Direction.HORIZONTAL)
        assert edge_between(T44, Node(0, 1), Node(3, 1)) == GridEdge(Node(3, 1), Direction.VERTICAL)

    def test_non_adjacent_nodes_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            edge_between(T44, Node(0, 0), Node(1, 1))

    def test_layers(self) -> None:
        a = GridEdge(Node(3, 2), Direction.VERTICAL)
        b = GridEdge(Node(1, 3), Direction.HORIZONTAL)
        plain = GridEdge(Node(3, 2), Direction.HORIZONTAL)
        assert in_layer_a(T44, a) and not in_layer_b(T44, a)
        assert in_layer_b(T44, b) and not in_layer_a(T44, b)
        assert not in_layer_a(T44, plain) and not in_layer_b(T44, plain)

    def test_layers_are_disjoint(self) -> None:
        for row in range(4):
            for col in range(4):
                for direction in Direction:
                    edge = GridEdge(Node(row, col), direction)
                    assert not (in_layer_a(T44, edge) and in_layer_b(T44, edge))


class TestCycles:
    def test_rejects_repeated_node(self) -> None:
        with pytest.raises(InvalidInputError):
            _cycle(T44, (0, 0), (0, 1), (0, 0), (1, 0))

    def test_rejects_non_adjacent_steps(self) -> None:
        with pytest.raises(InvalidInputError):
            _cycle(T66, (0, 0), (0, 1), (2, 1), (1, 0))

    def test_unit_face_has_four_corners(self) -> None:
        face = _cycle(T44, (0, 0), (0, 1), (1, 1), (1, 0))
        assert [c.node for c in corners(face)] == [Node(0, 0), Node(0, 1), Node(1, 1), Node(1, 0)]
        assert not has_uniform_corner_parity(face)

    def test_row_cycle_has_no_corners(self) -> None:
        row = _cycle(T44, (0, 0), (0, 1), (0, 2), (0, 3))
        assert corners(row) == []
        assert has_uniform_corner_parity(row)

    def test_even_rectangle_corners(self) -> None:
        found = corners(rectangle(T66, 0, 0, 2, 2))
        assert {c.node for c in found} == {Node(0, 0), Node(0, 2), Node(2, 2), Node(2, 0)}
        assert {c.parity for c in found} == {CornerParity.EVEN}

    def test_odd_rectangle_corners(self) -> None:
        found = corners(rectangle(T66, 1, 1, 2, 2))
        assert {c.parity for c in found} == {CornerParity.ODD}


class TestWinding:
    def test_row_cycle_crosses_layer_b_once(self) -> None:
        row = _cycle(T44, (0, 0), (0, 1), (0, 2), (0, 3))
        assert winding(row) == (0, 1)
        assert not is_contractible(row)

    def test_unit_face_is_contractible(self) -> None:
        face = _cycle(T44, (1, 1), (1, 2), (2, 2), (2, 1))
        assert winding(face) == (0, 0)
        assert is_contractible(face)

    def test_column_cycle_upwards(self) -> None:
        column = _cycle(T44, (0, 0), (3, 0), (2, 0), (1, 0))
        assert winding(column) == (-1, 0)

    def test_reversal_negates(self) -> None:
        column = _cycle(T44, (0, 0), (3, 0), (2, 0), (1, 0))
        assert winding(column, reverse=True) == (1, 0)
        assert winding(column.reversed()) == (1, 0)

    @pytest.mark.parametrize(
        "points",
        [
            ((0, 0), (0, 1), (0, 2), (0, 3)),
            ((0, 2), (1, 2), (2, 2), (3, 2)),
            ((3, 3), (3, 0), (0, 0), (0, 3)),
        ],
    )
    def test_layer_counts_match_winding_parity(self, points) -> None:
        cycle = _cycle(T44, *points)
        w_v, w_h = winding(cycle)
        assert layer_parities(T44, cycle.edges) == (w_v % 2, w_h % 2)


class TestDiskInterior:
    def test_unit_face_is_empty(self) -> None:
        assert disk_interior(_cycle(T44, (0, 0), (0, 1), (1, 1), (1, 0))) == frozenset()

    def test_two_by_two_rectangle(self) -> None:
        cycle = rectangle(T66, 0, 0, 2, 2)
        assert disk_interior(cycle) == {Node(1, 1)}
        assert interior_components(cycle) == 1

    def test_two_by_four_rectangle(self) -> None:
        cycle = rectangle(T88, 0, 0, 2, 4)
        assert disk_interior(cycle) == {Node(1, 1), Node(1, 2), Node(1, 3)}

    def test_rectangle_across_both_seams(self) -> None:
        assert disk_interior(rectangle(T66, 5, 5, 2, 2)) == {Node(0, 0)}

    def test_reversed_traversal_gives_same_interior(self) -> None:
        cycle = rectangle(T88, 1, 3, 4, 2)
        assert disk_interior(cycle) == disk_interior(cycle.reversed())

    def test_non_contractible_cycle_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            disk_interior(_cycle(T44, (0, 0), (0, 1), (0, 2), (0, 3)))


@pytest.mark.parametrize("dims", [T66, T88], ids=str)
def test_every_uniform_parity_rectangle_has_odd_connected_interior(dims: TorusDims) -> None:
    for cycle in uniform_parity_rectangles(dims):
        assert has_uniform_corner_parity(cycle)
        assert len(disk_interior(cycle)) % 2 == 1
        assert interior_components(cycle) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), big=st.booleans())
def test_random_uniform_parity_cycles(seed: int, big: bool) -> None:
    dims = T88 if big else T66
    cycle = random_uniform_parity_cycle(dims, random.Random(seed))
    assert is_contractible(cycle)
    assert has_uniform_corner_parity(cycle)
    assert len(disk_interior(cycle)) % 2 == 1
    assert interior_components(cycle) == 1

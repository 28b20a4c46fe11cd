"""Tests for Kasteleyn matrices, exact Pfaffians and the count identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toroidal_matchings.lib.errors import InvalidInputError
from toroidal_matchings.lib.matching import brick_matching, enumerate_matchings, type_of
from toroidal_matchings.lib.pfaffian import (
    ORIENTATIONS,
    Orientation,
    SkewMatrix,
    count_from_pfaffians,
    count_weights,
    determinant_exact,
    ee_sign,
    face_is_clockwise_odd,
    four_pfaffians,
    kasteleyn_matrix,
    matching_sign,
    normalized_pfaffians,
    pfaffian_exact,
    pfaffian_float,
    sign_combinations,
    signed_matching_sum,
    vanishing_orientations,
)
from toroidal_matchings.lib.torus_grid import Direction, GridEdge, Node, TorusDims, in_layer_a, in_layer_b

T44 = TorusDims(m=4, n=4)
T46 = TorusDims(m=4, n=6)


def _skew(upper: dict[tuple[int, int], int], size: int) -> SkewMatrix:
    entries = np.zeros((size, size), dtype=np.int64)
    for (i, j), value in upper.items():
        entries[i, j] = value
        entries[j, i] = -value
    return SkewMatrix(entries)


class TestPfaffianExact:
    def test_canonical_block(self) -> None:
        assert pfaffian_exact(_skew({(0, 1): 1}, 2)) == 1

    def test_zero_matrix(self) -> None:
        assert pfaffian_exact(_skew({}, 4)) == 0

    def test_four_by_four_expansion(self) -> None:
        # Pf = a01*a23 - a02*a13 + a03*a12
        matrix = _skew({(0, 1): 1, (0, 2): 2, (0, 3): 3, (1, 2): 4, (1, 3): 5, (2, 3): 6}, 4)
        assert pfaffian_exact(matrix) == 1 * 6 - 2 * 5 + 3 * 4

    def test_pivot_swap_flips_sign(self) -> None:
        assert pfaffian_exact(_skew({(0, 2): 1, (1, 3): 1}, 4)) == -1

    def test_odd_size_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            pfaffian_exact(_skew({(0, 1): 1}, 3))

    def test_non_antisymmetric_rejected(self) -> None:
        with pytest.raises(InvalidInputError):
            SkewMatrix(np.ones((2, 2), dtype=np.int64))

    @pytest.mark.parametrize("flips", ORIENTATIONS)
    def test_float_agrees_with_exact(self, flips: tuple[int, int]) -> None:
        matrix = kasteleyn_matrix(T46, *flips)
        assert pfaffian_float(matrix.entries) == pytest.approx(pfaffian_exact(matrix), abs=1e-6)

    def test_float_rejects_odd_size(self) -> None:
        with pytest.raises(InvalidInputError):
            pfaffian_float(np.zeros((3, 3)))

    @settings(max_examples=40, deadline=None)
    @given(
        half=st.integers(min_value=1, max_value=4),
        values=st.lists(st.integers(min_value=-3, max_value=3), min_size=28, max_size=28),
    )
    def test_square_is_determinant(self, half: int, values: list[int]) -> None:
        size = 2 * half
        pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
        matrix = _skew(dict(zip(pairs, values, strict=False)), size)
        assert pfaffian_exact(matrix) ** 2 == determinant_exact(matrix)


class TestKasteleynMatrix:
    @pytest.mark.parametrize("flips", ORIENTATIONS)
    def test_degree_four(self, flips: tuple[int, int]) -> None:
        matrix = kasteleyn_matrix(T44, *flips)
        assert (np.count_nonzero(matrix.entries, axis=1) == 4).all()
        assert np.array_equal(matrix.entries, -matrix.entries.T)

    @pytest.mark.parametrize("flips", ORIENTATIONS)
    @pytest.mark.parametrize("dims", [T44, T46, TorusDims(m=6, n=8)], ids=str)
    def test_every_face_clockwise_odd(self, dims: TorusDims, flips: tuple[int, int]) -> None:
        orientation = Orientation(dims, *flips)
        for top in range(dims.m):
            for left in range(dims.n):
                assert face_is_clockwise_odd(orientation, top, left)

    def test_flips_only_touch_layer_entries(self) -> None:
        base = kasteleyn_matrix(T44).entries
        for theta, tau in ORIENTATIONS:
            other = kasteleyn_matrix(T44, theta, tau).entries
            for row in range(4):
                for col in range(4):
                    for direction in Direction:
                        edge = GridEdge(Node(row, col), direction)
                        i = row * 4 + col
                        head = edge.head(T44)
                        j = head.row * 4 + head.col
                        flipped = (theta and in_layer_a(T44, edge)) or (tau and in_layer_b(T44, edge))
                        assert (other[i, j] != base[i, j]) == bool(flipped)


class TestCountIdentity:
    @pytest.mark.parametrize("dims", [T44, pytest.param(T46, marks=pytest.mark.slow)], ids=str)
    def test_pfaffians_equal_signed_sums(self, dims: TorusDims) -> None:
        pfaffians = four_pfaffians(dims)
        for flips in ORIENTATIONS:
            assert pfaffians[flips] == signed_matching_sum(dims, Orientation(dims, *flips))

    @pytest.mark.parametrize("dims", [T44, T46], ids=str)
    def test_exactly_one_vanishes(self, dims: TorusDims) -> None:
        assert len(vanishing_orientations(four_pfaffians(dims))) == 1

    @pytest.mark.parametrize("dims", [T44, T46], ids=str)
    def test_squares_equal_determinants(self, dims: TorusDims) -> None:
        for flips, value in four_pfaffians(dims).items():
            assert value**2 == determinant_exact(kasteleyn_matrix(dims, *flips))

    @pytest.mark.parametrize("dims", [T44, T46], ids=str)
    def test_count_matches_enumeration(self, dims: TorusDims) -> None:
        total = sum(1 for _ in enumerate_matchings(dims))
        pfaffians = four_pfaffians(dims)
        assert count_from_pfaffians(dims, pfaffians) == total
        assert sign_combinations(pfaffians, total)

    def test_normalized_brick_term_is_positive(self) -> None:
        brick = brick_matching(T44)
        normalized = normalized_pfaffians(T44)
        raw = four_pfaffians(T44)
        for flips in ORIENTATIONS:
            sign = matching_sign(brick, Orientation(T44, *flips))
            assert normalized[flips] == sign * raw[flips]

    def test_vanishing_orientation_signs_track_ee(self) -> None:
        (flips,) = vanishing_orientations(four_pfaffians(T44))
        orientation = Orientation(T44, *flips)
        ratios = {matching_sign(m, orientation) * ee_sign(m) for m in enumerate_matchings(T44)}
        assert len(ratios) == 1

    def test_matching_sign_is_unit(self) -> None:
        orientation = Orientation(T44)
        for matching in enumerate_matchings(T44):
            assert matching_sign(matching, orientation) in (-1, 1)
            assert ee_sign(matching) == (1 if type_of(matching).is_even else -1)

    def test_count_weights_reproduce_the_count(self) -> None:
        pfaffians = four_pfaffians(T46)
        weights = count_weights(T46, pfaffians)
        assert set(weights.values()) <= {-1, 1}
        assert abs(sum(weights[q] * pfaffians[q] for q in ORIENTATIONS)) // 2 == count_from_pfaffians(T46)

    def test_float_pfaffians_find_the_same_vanishing_orientation(self) -> None:
        exact = four_pfaffians(T44)
        approx = {q: pfaffian_float(kasteleyn_matrix(T44, *q).entries) for q in ORIENTATIONS}
        assert vanishing_orientations(approx, rel_tol=1e-9) == vanishing_orientations(exact)
        assert count_weights(T44, approx, rel_tol=1e-9) == count_weights(T44, exact)

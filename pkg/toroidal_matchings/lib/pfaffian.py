"""Kasteleyn matrices of T_{m,n} and their exact Pfaffians.

The base orientation points horizontal edges towards increasing column and
vertical edges down in even columns, up in odd columns; every unit face of
the torus is then clockwise-odd. The four matrices K(θ, τ) multiply the
layer-A entries by (-1)^θ and the layer-B entries by (-1)^τ.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from itertools import product

import numpy as np
from structlog import get_logger

from toroidal_matchings.lib.errors import InvalidInputError
from toroidal_matchings.lib.matching import (
    PerfectMatching,
    brick_matching,
    enumerate_matchings,
    type_of,
)
from toroidal_matchings.lib.torus_grid import (
    Direction,
    GridEdge,
    Node,
    TorusDims,
    edge_between,
    in_layer_a,
    in_layer_b,
)

logger = get_logger(__name__)

type Flips = tuple[int, int]

ORIENTATIONS: tuple[Flips, ...] = tuple(product((0, 1), repeat=2))


@dataclass(frozen=True)
class Orientation:
    dims: TorusDims
    theta: int = 0
    tau: int = 0

    @property
    def flips(self) -> Flips:
        return self.theta, self.tau

    def base(self, edge: GridEdge) -> int:
        """+1 if the base orientation runs origin -> head, else -1."""
        if edge.direction == Direction.HORIZONTAL:
            return 1
        return 1 if edge.origin.col % 2 == 0 else -1

    def sign(self, edge: GridEdge) -> int:
        """Entry K[origin, head] of the Kasteleyn matrix for this orientation."""
        value = self.base(edge)
        if self.theta and in_layer_a(self.dims, edge):
            value = -value
        if self.tau and in_layer_b(self.dims, edge):
            value = -value
        return value

    def points_forward(self, u: Node, v: Node) -> bool:
        edge = edge_between(self.dims, u, v)
        return (self.sign(edge) > 0) == (edge.origin == u)


def face_is_clockwise_odd(orientation: Orientation, top: int, left: int) -> bool:
    """The unit face with top-left corner (top, left) has an odd number of
    edges oriented along its clockwise traversal."""
    m, n = orientation.dims.m, orientation.dims.n
    ring = [
        Node(top, left),
        Node(top, (left + 1) % n),
        Node((top + 1) % m, (left + 1) % n),
        Node((top + 1) % m, left),
    ]
    clockwise = sum(
        orientation.points_forward(u, ring[(k + 1) % 4]) for k, u in enumerate(ring)
    )
    return clockwise % 2 == 1


def node_index(dims: TorusDims, v: Node) -> int:
    return v.row * dims.n + v.col


@dataclass(frozen=True, eq=False)
class SkewMatrix:
    """An antisymmetric integer matrix indexed by row-major node order."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        rows, cols = self.entries.shape
        if rows != cols:
            msg = f"Skew matrix must be square, got {rows}x{cols}"
            raise InvalidInputError(msg)
        if not np.array_equal(self.entries, -self.entries.T):
            msg = "Matrix is not antisymmetric"
            raise InvalidInputError(msg)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def kasteleyn_matrix(dims: TorusDims, theta: int = 0, tau: int = 0) -> SkewMatrix:
    orientation = Orientation(dims, theta, tau)
    entries = np.zeros((dims.size, dims.size), dtype=np.int64)
    for row in range(dims.m):
        for col in range(dims.n):
            for direction in Direction:
                edge = GridEdge(Node(row, col), direction)
                i = node_index(dims, edge.origin)
                j = node_index(dims, edge.head(dims))
                entries[i, j] = orientation.sign(edge)
                entries[j, i] = -entries[i, j]
    return SkewMatrix(entries)


def pfaffian_exact(matrix: SkewMatrix) -> int:
    """Exact Pfaffian by skew-symmetric elimination over the rationals.

    Pf([[0, 1], [-1, 0]]) = 1.
    """
    size = matrix.size
    if size % 2:
        msg = f"Pfaffian of an odd-sized ({size}) matrix is undefined"
        raise InvalidInputError(msg)
    a = np.array([[Fraction(int(x)) for x in row] for row in matrix.entries], dtype=object)
    result = Fraction(1)
    for k in range(0, size - 1, 2):
        pivot = next((j for j in range(k + 1, size) if a[k, j] != 0), None)
        if pivot is None:
            return 0
        if pivot != k + 1:
            a[[k + 1, pivot]] = a[[pivot, k + 1]]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            result = -result
        piv = a[k, k + 1]
        result *= piv
        if k + 2 < size:
            u = a[k, k + 2 :]
            w = a[k + 1, k + 2 :]
            a[k + 2 :, k + 2 :] += (np.outer(w, u) - np.outer(u, w)) / piv
    if result.denominator != 1:
        msg = f"Pfaffian of an integer matrix came out non-integral: {result}"
        raise ArithmeticError(msg)
    return int(result)


def pfaffian_float(entries: np.ndarray, tolerance: float = 1e-9) -> float:
    """Floating-point Pfaffian with partial pivoting, for weights too large to do exactly.

    A pivot below `tolerance` counts as zero.
    """
    size = entries.shape[0]
    if size % 2:
        msg = f"Pfaffian of an odd-sized ({size}) matrix is undefined"
        raise InvalidInputError(msg)
    a = np.array(entries, dtype=np.float64)
    result = 1.0
    for k in range(0, size - 1, 2):
        pivot = k + 1 + int(np.argmax(np.abs(a[k, k + 1 :])))
        if abs(a[k, pivot]) < tolerance:
            return 0.0
        if pivot != k + 1:
            a[[k + 1, pivot]] = a[[pivot, k + 1]]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            result = -result
        piv = a[k, k + 1]
        result *= piv
        if k + 2 < size:
            u = a[k, k + 2 :]
            w = a[k + 1, k + 2 :]
            a[k + 2 :, k + 2 :] += (np.outer(w, u) - np.outer(u, w)) / piv
    return result


def determinant_exact(matrix: SkewMatrix) -> int:
    """Fraction-free (Bareiss) determinant in Python integers."""
    size = matrix.size
    if size == 0:
        return 1
    a = np.array(matrix.entries.tolist(), dtype=object)
    sign, previous = 1, 1
    for k in range(size - 1):
        if a[k, k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i, k] != 0), None)
            if swap is None:
                return 0
            a[[k, swap]] = a[[swap, k]]
            sign = -sign
        a[k + 1 :, k + 1 :] = (
            a[k + 1 :, k + 1 :] * a[k, k] - np.outer(a[k + 1 :, k], a[k, k + 1 :])
        ) // previous
        previous = a[k, k]
    return sign * int(a[size - 1, size - 1])


@cache
def _edge_terms(orientation: Orientation) -> dict[GridEdge, tuple[int, int, int]]:
    # edge -> (i, j, K[i, j]) with i < j
    dims = orientation.dims
    terms = {}
    for row in range(dims.m):
        for col in range(dims.n):
            for direction in Direction:
                edge = GridEdge(Node(row, col), direction)
                i = node_index(dims, edge.origin)
                j = node_index(dims, edge.head(dims))
                value = orientation.sign(edge)
                terms[edge] = (i, j, value) if i < j else (j, i, -value)
    return terms


def _permutation_parity(perm: list[int]) -> int:
    seen = bytearray(len(perm))
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        v = start
        while not seen[v]:
            seen[v] = 1
            v = perm[v]
    return (len(perm) - cycles) % 2


def matching_sign(matching: PerfectMatching, orientation: Orientation) -> int:
    """The term of M in the Pfaffian expansion of K(θ, τ): ±1."""
    terms = _edge_terms(orientation)
    pairs = sorted(terms[edge] for edge in matching.edges)
    value = 1
    perm: list[int] = []
    for i, j, entry in pairs:
        perm.extend((i, j))
        value *= entry
    return -value if _permutation_parity(perm) else value


def signed_matching_sum(
    dims: TorusDims,
    orientation: Orientation,
    matchings: Iterable[PerfectMatching] | None = None,
) -> int:
    stream = enumerate_matchings(dims) if matchings is None else matchings
    return sum(matching_sign(m, orientation) for m in stream)


def four_pfaffians(dims: TorusDims) -> dict[Flips, int]:
    values = {q: pfaffian_exact(kasteleyn_matrix(dims, *q)) for q in ORIENTATIONS}
    logger.info("Computed Pfaffians", dims=str(dims), values={f"{t}{s}": v for (t, s), v in values.items()})
    return values


def vanishing_orientations(pfaffians: Mapping[Flips, float], rel_tol: float = 0.0) -> list[Flips]:
    """Orientations whose Pfaffian is zero, or within `rel_tol` of the largest one."""
    scale = max((abs(v) for v in pfaffians.values()), default=0)
    return [q for q, value in pfaffians.items() if abs(value) <= rel_tol * scale]


def normalized_pfaffians(
    dims: TorusDims, pfaffians: Mapping[Flips, int] | None = None
) -> dict[Flips, int]:
    """Each Pf(θ, τ) times the sign the brick matching gets under (θ, τ)."""
    values = four_pfaffians(dims) if pfaffians is None else pfaffians
    brick = brick_matching(dims)
    return {q: matching_sign(brick, Orientation(dims, *q)) * v for q, v in values.items()}


def count_weights(
    dims: TorusDims, pfaffians: Mapping[Flips, float] | None = None, rel_tol: float = 0.0
) -> dict[Flips, int]:
    """ε·sign(brick) per orientation, ε = -1 exactly on the vanishing one.

    The number of matchings is ½ |Σ weight·Pf|.
    """
    values = four_pfaffians(dims) if pfaffians is None else pfaffians
    vanishing = vanishing_orientations(values, rel_tol)
    if len(vanishing) != 1:
        msg = f"Expected exactly one vanishing Pfaffian on {dims}, found {len(vanishing)}"
        raise ArithmeticError(msg)
    brick = brick_matching(dims)
    return {
        q: (-1 if q in vanishing else 1) * matching_sign(brick, Orientation(dims, *q))
        for q in ORIENTATIONS
    }


def count_from_pfaffians(dims: TorusDims, pfaffians: Mapping[Flips, int] | None = None) -> int:
    """½ Σ ε·Pf' with Pf' the brick-normalized Pfaffians."""
    values = four_pfaffians(dims) if pfaffians is None else pfaffians
    weights = count_weights(dims, values)
    return abs(sum(weights[q] * values[q] for q in ORIENTATIONS)) // 2


def sign_combinations(pfaffians: Mapping[Flips, int], total: int) -> list[tuple[int, ...]]:
    """Every ε ∈ {±1}⁴ with |½ Σ ε·Pf| = total, in lexicographic order."""
    values = [pfaffians[q] for q in ORIENTATIONS]
    return [
        eps
        for eps in product((-1, 1), repeat=len(values))
        if abs(sum(e * v for e, v in zip(eps, values, strict=True))) == 2 * total
    ]


def ee_sign(matching: PerfectMatching) -> int:
    """+1 on EE matchings, -1 on every other type."""
    return 1 if type_of(matching).is_even else -1


def edge_entry(orientation: Orientation, edge: GridEdge) -> int:
    """K[i, j] for the endpoints i < j of `edge`."""
    return _edge_terms(orientation)[edge][2]

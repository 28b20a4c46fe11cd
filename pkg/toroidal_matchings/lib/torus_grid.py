"""Geometry and topology of the toroidal square grid T_{m,n}.

Nodes are (row, col) pairs with arithmetic modulo m and n. The two seam
layers follow one fixed convention throughout the package: layer A holds
the vertical edges between rows m-1 and 0, layer B the horizontal edges
between columns n-1 and 0.
"""

from __future__ import annotations

import random
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cache, cached_property
from typing import NamedTuple

import networkx as nx
from pydantic import BaseModel, field_validator
from structlog import get_logger

from toroidal_matchings.constants import MIN_SIDE
from toroidal_matchings.lib.errors import InvalidInputError

logger = get_logger(__name__)


class TorusDims(BaseModel):
    """Even grid dimensions (m rows, n columns), both at least 4."""

    m: int
    n: int

    model_config = {"frozen": True}

    @field_validator("m", "n")
    @classmethod
    def even_and_large_enough(cls, value: int) -> int:
        if value % 2:
            msg = f"Grid side {value} is odd; only even sides have perfect matchings"
            raise ValueError(msg)
        if value < MIN_SIDE:
            msg = f"Grid side {value} is below {MIN_SIDE}; T_{{2,n}} is a multigraph"
            raise ValueError(msg)
        return value

    @property
    def size(self) -> int:
        return self.m * self.n

    def __str__(self) -> str:
        return f"T_{{{self.m},{self.n}}}"


class Node(NamedTuple):
    row: int
    col: int

    @property
    def is_black(self) -> bool:
        return (self.row + self.col) % 2 == 0

    @property
    def parity_class(self) -> tuple[int, int]:
        return self.row % 2, self.col % 2


class Direction(StrEnum):
    HORIZONTAL = "H"
    VERTICAL = "V"


class GridEdge(NamedTuple):
    """Canonical undirected edge.

    A horizontal edge joins origin to (row, col+1); a vertical edge joins
    origin to (row+1, col). Sorting GridEdges sorts by (row, col, dir).
    """

    origin: Node
    direction: Direction

    def head(self, dims: TorusDims) -> Node:
        row, col = self.origin
        if self.direction == Direction.HORIZONTAL:
            return Node(row, (col + 1) % dims.n)
        return Node((row + 1) % dims.m, col)

    def endpoints(self, dims: TorusDims) -> tuple[Node, Node]:
        return self.origin, self.head(dims)


class CornerParity(StrEnum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


class Corner(NamedTuple):
    node: Node
    parity: CornerParity


def check_node(dims: TorusDims, v: Node) -> Node:
    if not (0 <= v.row < dims.m and 0 <= v.col < dims.n):
        msg = f"Node {tuple(v)} is outside {dims}"
        raise InvalidInputError(msg)
    return v


def neighbors(dims: TorusDims, v: Node) -> frozenset[Node]:
    """The four grid neighbours of v, with wraparound."""
    row, col = check_node(dims, v)
    m, n = dims.m, dims.n
    return frozenset(
        (
            Node((row - 1) % m, col),
            Node((row + 1) % m, col),
            Node(row, (col - 1) % n),
            Node(row, (col + 1) % n),
        )
    )


def step(dims: TorusDims, u: Node, v: Node) -> tuple[int, int]:
    """Unit displacement (drow, dcol) from u to an adjacent v."""
    dr = (v.row - u.row) % dims.m
    dc = (v.col - u.col) % dims.n
    match (dr, dc):
        case (0, 1):
            return 0, 1
        case (0, c) if c == dims.n - 1:
            return 0, -1
        case (1, 0):
            return 1, 0
        case (r, 0) if r == dims.m - 1:
            return -1, 0
    msg = f"Nodes {tuple(u)} and {tuple(v)} are not adjacent in {dims}"
    raise InvalidInputError(msg)


def edge_between(dims: TorusDims, u: Node, v: Node) -> GridEdge:
    dr, dc = step(dims, u, v)
    if dr == 0:
        return GridEdge(u if dc == 1 else v, Direction.HORIZONTAL)
    return GridEdge(u if dr == 1 else v, Direction.VERTICAL)


def check_edge(dims: TorusDims, edge: GridEdge) -> GridEdge:
    check_node(dims, edge.origin)
    if not isinstance(edge.direction, Direction):
        msg = f"Edge direction {edge.direction!r} is neither H nor V"
        raise InvalidInputError(msg)
    return edge


def in_layer_a(dims: TorusDims, edge: GridEdge) -> bool:
    return edge.direction == Direction.VERTICAL and edge.origin.row == dims.m - 1


def in_layer_b(dims: TorusDims, edge: GridEdge) -> bool:
    return edge.direction == Direction.HORIZONTAL and edge.origin.col == dims.n - 1


def layer_parities(dims: TorusDims, edges: Iterable[GridEdge]) -> tuple[int, int]:
    """(|edges ∩ A| mod 2, |edges ∩ B| mod 2)."""
    a = sum(1 for e in edges if in_layer_a(dims, e))
    b = sum(1 for e in edges if in_layer_b(dims, e))
    return a % 2, b % 2


@dataclass(frozen=True)
class GridCycle:
    """A simple cycle of T_{m,n}, stored as its cyclic node sequence."""

    dims: TorusDims
    nodes: tuple[Node, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) < 4:
            msg = f"A cycle of {self.dims} needs at least 4 nodes, got {len(self.nodes)}"
            raise InvalidInputError(msg)
        if len(set(self.nodes)) != len(self.nodes):
            msg = "Cycle repeats a node"
            raise InvalidInputError(msg)
        for u, v in self.steps():
            check_node(self.dims, u)
            step(self.dims, u, v)

    def steps(self) -> Iterator[tuple[Node, Node]]:
        nodes = self.nodes
        for k, u in enumerate(nodes):
            yield u, nodes[(k + 1) % len(nodes)]

    @cached_property
    def edges(self) -> frozenset[GridEdge]:
        return frozenset(edge_between(self.dims, u, v) for u, v in self.steps())

    def reversed(self) -> GridCycle:
        return GridCycle(self.dims, tuple(reversed(self.nodes)))


def corners(cycle: GridCycle) -> list[Corner]:
    """Nodes where the cycle turns between a horizontal and a vertical edge."""
    nodes = cycle.nodes
    found: list[Corner] = []
    for k, v in enumerate(nodes):
        before = step(cycle.dims, nodes[k - 1], v)
        after = step(cycle.dims, v, nodes[(k + 1) % len(nodes)])
        if (before[0] == 0) == (after[0] == 0):
            continue
        match v.parity_class:
            case (0, 0):
                parity = CornerParity.EVEN
            case (1, 1):
                parity = CornerParity.ODD
            case _:
                parity = CornerParity.MIXED
        found.append(Corner(v, parity))
    return found


def has_uniform_corner_parity(cycle: GridCycle) -> bool:
    """True iff every corner has the same (row parity, column parity)."""
    return len({c.node.parity_class for c in corners(cycle)}) <= 1


def winding(cycle: GridCycle, *, reverse: bool = False) -> tuple[int, int]:
    """Signed seam crossings (wV, wH) of the cycle.

    wV counts layer-A crossings (row m-1 to row 0 is +1), wH counts
    layer-B crossings (column n-1 to column 0 is +1).
    """
    m, n = cycle.dims.m, cycle.dims.n
    w_v = w_h = 0
    for u, v in cycle.steps():
        if u.col == v.col:
            if u.row == m - 1 and v.row == 0:
                w_v += 1
            elif u.row == 0 and v.row == m - 1:
                w_v -= 1
        elif u.col == n - 1 and v.col == 0:
            w_h += 1
        elif u.col == 0 and v.col == n - 1:
            w_h -= 1
    return (-w_v, -w_h) if reverse else (w_v, w_h)


def is_contractible(cycle: GridCycle) -> bool:
    return winding(cycle) == (0, 0)


def lift(cycle: GridCycle) -> list[tuple[int, int]]:
    """Unwrap the cycle into Z^2 starting at its first node."""
    start = cycle.nodes[0]
    points = [(start.row, start.col)]
    for u, v in list(cycle.steps())[:-1]:
        dr, dc = step(cycle.dims, u, v)
        row, col = points[-1]
        points.append((row + dr, col + dc))
    return points


def _inside(point: tuple[int, int], polygon: Sequence[tuple[int, int]]) -> bool:
    # Ray towards increasing column; vertical unit edges counted half-open in row.
    row, col = point
    crossings = 0
    for k, (r1, c1) in enumerate(polygon):
        r2, c2 = polygon[(k + 1) % len(polygon)]
        if c1 != c2 or c1 <= col:
            continue
        if min(r1, r2) <= row < max(r1, r2):
            crossings += 1
    return crossings % 2 == 1


def disk_interior(cycle: GridCycle) -> frozenset[Node]:
    """Nodes strictly inside the disk bounded by a contractible cycle."""
    if not is_contractible(cycle):
        msg = f"Cycle with winding {winding(cycle)} bounds no disk"
        raise InvalidInputError(msg)
    polygon = lift(cycle)
    on_cycle = set(polygon)
    rows = [r for r, _ in polygon]
    cols = [c for _, c in polygon]
    m, n = cycle.dims.m, cycle.dims.n
    interior = {
        Node(r % m, c % n)
        for r in range(min(rows) + 1, max(rows))
        for c in range(min(cols) + 1, max(cols))
        if (r, c) not in on_cycle and _inside((r, c), polygon)
    }
    return frozenset(interior)


@cache
def torus_graph(dims: TorusDims) -> nx.Graph:
    graph = nx.grid_2d_graph(dims.m, dims.n, periodic=True)
    return nx.relabel_nodes(graph, lambda rc: Node(*rc))


def interior_components(cycle: GridCycle) -> int:
    """Connected components of T_{m,n} minus the cycle inside its disk."""
    interior = disk_interior(cycle)
    if not interior:
        return 0
    return nx.number_connected_components(torus_graph(cycle.dims).subgraph(interior))


def rectangle(dims: TorusDims, top: int, left: int, height: int, width: int) -> GridCycle:
    """Boundary of the axis-aligned rectangle, traversed clockwise."""
    m, n = dims.m, dims.n
    path = (
        [(top, left + k) for k in range(width)]
        + [(top + k, left + width) for k in range(height)]
        + [(top + height, left + width - k) for k in range(width)]
        + [(top + height - k, left) for k in range(height)]
    )
    return GridCycle(dims, tuple(Node(r % m, c % n) for r, c in path))


def uniform_parity_rectangles(dims: TorusDims) -> Iterator[GridCycle]:
    """Every placement of every rectangle whose corners share a parity class."""
    for height in range(2, dims.m - 1, 2):
        for width in range(2, dims.n - 1, 2):
            for top in range(dims.m):
                for left in range(dims.n):
                    yield rectangle(dims, top, left, height, width)


def _boundary_loop(cells: set[tuple[int, int]]) -> list[tuple[int, int]] | None:
    # Cells live on the 2-spaced lattice; the loop is returned in unit steps.
    sides: Counter[frozenset[tuple[int, int]]] = Counter()
    for a, b in cells:
        r, c = 2 * a, 2 * b
        ring = [(r, c), (r, c + 1), (r, c + 2), (r + 1, c + 2), (r + 2, c + 2),
                (r + 2, c + 1), (r + 2, c), (r + 1, c)]
        for k, p in enumerate(ring):
            sides[frozenset((p, ring[(k + 1) % 8]))] += 1
    boundary = [edge for edge, count in sides.items() if count == 1]
    adjacency: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for edge in boundary:
        p, q = tuple(edge)
        adjacency.setdefault(p, []).append(q)
        adjacency.setdefault(q, []).append(p)
    if any(len(nbrs) != 2 for nbrs in adjacency.values()):
        return None
    start = min(adjacency)
    loop = [start]
    previous, current = start, adjacency[start][0]
    while current != start:
        loop.append(current)
        a, b = adjacency[current]
        previous, current = current, (b if a == previous else a)
    if len(loop) != len(boundary):
        return None
    return loop


def random_uniform_parity_cycle(dims: TorusDims, rng: random.Random) -> GridCycle:
    """Boundary of a random simply connected polyomino of 2x2 blocks.

    Every corner of the boundary sits on the 2-spaced lattice, so after a
    random offset all corners share one parity class. The offset may carry
    the cycle across either seam.
    """
    rows, cols = (dims.m - 1) // 2, (dims.n - 1) // 2
    while True:
        seed_cell = (rng.randrange(rows), rng.randrange(cols))
        cells = {seed_cell}
        target = rng.randint(1, rows * cols)
        for _ in range(8 * target):
            if len(cells) >= target:
                break
            a, b = rng.choice(sorted(cells))
            da, db = rng.choice(((0, 1), (1, 0), (0, -1), (-1, 0)))
            if 0 <= a + da < rows and 0 <= b + db < cols:
                cells.add((a + da, b + db))
        loop = _boundary_loop(cells)
        if loop is None:
            logger.debug("Rejected polyomino with pinched boundary", cells=len(cells))
            continue
        dr, dc = rng.randrange(dims.m), rng.randrange(dims.n)
        return GridCycle(
            dims, tuple(Node((r + dr) % dims.m, (c + dc) % dims.n) for r, c in loop)
        )

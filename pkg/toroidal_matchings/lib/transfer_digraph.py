"""The out-degree-one digraph D_{m,n}(M) of a perfect matching and its dicycles.

Black nodes point at their matched partner. White nodes continue straight
past their matched edge: the successor of a white v matched to u is the
neighbour of v on the far side from u, in the same row or column.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property

from structlog import get_logger

from toroidal_matchings.lib.interfaces import Predicate
from toroidal_matchings.lib.matching import PerfectMatching
from toroidal_matchings.lib.torus_grid import (
    GridCycle,
    GridEdge,
    Node,
    TorusDims,
    edge_between,
    layer_parities,
    step,
)
from toroidal_matchings.models import CycleType

logger = get_logger(__name__)


@dataclass(frozen=True)
class TransferDigraph:
    dims: TorusDims
    succ: Mapping[Node, Node]

    def path_from(self, start: Node, stop: Predicate[Node] | None = None) -> list[Node]:
        """Follow successors from `start` up to the first node that repeats or meets `stop`."""
        path, seen = [start], {start}
        while True:
            nxt = self.succ[path[-1]]
            path.append(nxt)
            if nxt in seen or (stop is not None and stop(nxt)):
                return path
            seen.add(nxt)


@dataclass(frozen=True)
class DiCycle:
    """A directed cycle of D(M), rotated to start at its smallest node."""

    dims: TorusDims
    nodes: tuple[Node, ...]

    @cached_property
    def shadow(self) -> frozenset[GridEdge]:
        """U(C): the cycle's edges with orientation forgotten."""
        return self.as_grid_cycle().edges

    @cached_property
    def order_key(self) -> tuple[Node, ...]:
        return tuple(sorted(self.nodes))

    def as_grid_cycle(self) -> GridCycle:
        return GridCycle(self.dims, self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def build(matching: PerfectMatching) -> TransferDigraph:
    dims = matching.dims
    succ: dict[Node, Node] = {}
    for v, u in matching.partners.items():
        if v.is_black:
            succ[v] = u
            continue
        dr, dc = step(dims, u, v)
        succ[v] = Node((v.row + dr) % dims.m, (v.col + dc) % dims.n)
    return TransferDigraph(dims, succ)


def dicycles(digraph: TransferDigraph) -> list[DiCycle]:
    """All dicycles, found by successor chasing with three-colour marking.

    Returned in the order their smallest nodes appear in row-major order.
    """
    dims = digraph.dims
    # 0 unvisited, 1 on the current walk, 2 finished
    state: dict[Node, int] = {}
    found: list[DiCycle] = []
    for row in range(dims.m):
        for col in range(dims.n):
            start = Node(row, col)
            if state.get(start):
                continue
            walk: list[Node] = []
            v = start
            while not state.get(v):
                state[v] = 1
                walk.append(v)
                v = digraph.succ[v]
            if state[v] == 1:
                cycle = walk[walk.index(v) :]
                k = cycle.index(min(cycle))
                found.append(DiCycle(dims, tuple(cycle[k:] + cycle[:k])))
            for w in walk:
                state[w] = 2
    found.sort(key=lambda c: c.order_key)
    return found


def canonical_first(digraph: TransferDigraph) -> DiCycle:
    """C_M: the dicycle whose sorted node list is lexicographically smallest.

    Depends only on node sets, so reversing a cycle never changes the pick.
    """
    return min(dicycles(digraph), key=lambda c: c.order_key)


def cycle_type(cycle: DiCycle) -> CycleType:
    return CycleType.from_parities(*layer_parities(cycle.dims, cycle.shadow))


def alternates(cycle: DiCycle, matching: PerfectMatching) -> bool:
    """True iff consecutive shadow edges alternate in and out of the matching."""
    nodes = cycle.nodes
    flags = [
        edge_between(cycle.dims, u, nodes[(k + 1) % len(nodes)]) in matching.edges
        for k, u in enumerate(nodes)
    ]
    return len(flags) % 2 == 0 and all(
        flags[k] != flags[(k + 1) % len(flags)] for k in range(len(flags))
    )

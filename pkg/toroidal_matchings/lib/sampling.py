"""Uniform sampling of perfect matchings by enumeration-prefix weighting.

A draw walks the enumeration tree (first uncovered node in row-major order)
and picks each branch with probability proportional to the number of
matchings below it. Branch sizes come from the four Kasteleyn Pfaffians
restricted to the still uncovered nodes: for a prefix D,

    #completions(D) = ½ |Σ_q w_q · Π_{e∈D} K_q[e] · Pf(K_q[R, R])|

with R the uncovered nodes and w_q the whole-grid count weights.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cache
from math import prod

import numpy as np
from structlog import get_logger

from toroidal_matchings.lib.matching import PerfectMatching
from toroidal_matchings.lib.pfaffian import (
    ORIENTATIONS,
    Flips,
    Orientation,
    SkewMatrix,
    count_weights,
    edge_entry,
    kasteleyn_matrix,
    node_index,
    pfaffian_exact,
    pfaffian_float,
)
from toroidal_matchings.lib.torus_grid import GridEdge, Node, TorusDims, edge_between, neighbors

logger = get_logger(__name__)

# Float Pfaffians below this fraction of the largest count as vanishing.
VANISHING_REL_TOL = 1e-9


@cache
def _matrices(dims: TorusDims) -> dict[Flips, np.ndarray]:
    return {q: kasteleyn_matrix(dims, *q).entries for q in ORIENTATIONS}


@cache
def _float_weights(dims: TorusDims) -> dict[Flips, int]:
    pfaffians = {q: pfaffian_float(entries) for q, entries in _matrices(dims).items()}
    return count_weights(dims, pfaffians, rel_tol=VANISHING_REL_TOL)


def _signed_total[N: (int, float)](
    dims: TorusDims,
    chosen: Sequence[GridEdge],
    weights: dict[Flips, int],
    pfaffian: Callable[[np.ndarray], N],
) -> N:
    covered = {node_index(dims, v) for edge in chosen for v in edge.endpoints(dims)}
    keep = [i for i in range(dims.size) if i not in covered]
    block = np.ix_(keep, keep)
    total = 0
    for q, weight in weights.items():
        orientation = Orientation(dims, *q)
        factor = prod(edge_entry(orientation, edge) for edge in chosen)
        total += weight * factor * pfaffian(_matrices(dims)[q][block])
    return total


def completion_count(dims: TorusDims, chosen: Sequence[GridEdge] = ()) -> int:
    """Exact number of perfect matchings that contain every edge of `chosen`.

    `chosen` must itself be a matching (no shared endpoints).
    """
    total = _signed_total(
        dims, chosen, count_weights(dims), lambda block: pfaffian_exact(SkewMatrix(block))
    )
    return abs(total) // 2


@dataclass
class MatchingSampler:
    """Seeded uniform sampler over the perfect matchings of T_{m,n}.

    Branch weights are float Pfaffians, cached per set of covered nodes.
    """

    dims: TorusDims
    seed: int = 0
    _rng: random.Random = field(init=False, repr=False)
    _weights: dict[frozenset[Node], float] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._rng = random.Random(self.seed)

    def _completions(self, chosen: list[GridEdge]) -> float:
        covered = frozenset(v for edge in chosen for v in edge.endpoints(self.dims))
        cached = self._weights.get(covered)
        if cached is not None:
            return cached
        total = abs(_signed_total(self.dims, chosen, _float_weights(self.dims), pfaffian_float)) / 2
        value = total if total >= 0.5 else 0.0
        self._weights[covered] = value
        return value

    def draw(self) -> PerfectMatching:
        dims = self.dims
        chosen: list[GridEdge] = []
        covered: set[Node] = set()
        for row in range(dims.m):
            for col in range(dims.n):
                v = Node(row, col)
                if v in covered:
                    continue
                options = [edge_between(dims, v, u) for u in neighbors(dims, v) if u not in covered]
                live = [(edge, self._completions([*chosen, edge])) for edge in options]
                live = [(edge, weight) for edge, weight in live if weight]
                if not live:
                    msg = f"No perfect matching of {dims} extends the {len(chosen)} edges drawn so far"
                    raise ArithmeticError(msg)
                pick = self._rng.random() * sum(weight for _, weight in live)
                for edge, weight in live:
                    if pick < weight:
                        break
                    pick -= weight
                chosen.append(edge)
                covered.update(edge.endpoints(dims))
        return PerfectMatching(dims, frozenset(chosen))


def sample_matchings(dims: TorusDims, count: int, seed: int = 0) -> Iterator[PerfectMatching]:
    """`count` independent uniform draws; deterministic for a given seed."""
    sampler = MatchingSampler(dims, seed)
    for _ in range(count):
        yield sampler.draw()
    logger.info("Sampled matchings", dims=str(dims), count=count, seed=seed, cached=len(sampler._weights))

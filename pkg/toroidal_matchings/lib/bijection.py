"""The involution Φ(M) = M △ U(C_M) and the well-behaved embedding into T_{m+4,n+4}."""

from __future__ import annotations

from typing import NamedTuple

from structlog import get_logger

from toroidal_matchings.lib.config import VerificationMode
from toroidal_matchings.lib.errors import ConstructionError, PostconditionError
from toroidal_matchings.lib.matching import (
    PerfectMatching,
    profile,
    require_valid,
    type_of,
    validate,
)
from toroidal_matchings.lib.torus_grid import (
    Direction,
    GridEdge,
    Node,
    TorusDims,
    in_layer_a,
    in_layer_b,
)
from toroidal_matchings.lib.transfer_digraph import (
    DiCycle,
    build,
    canonical_first,
    cycle_type,
    dicycles,
)
from toroidal_matchings.models import CycleType

logger = get_logger(__name__)

# Interior edges move by (+2, +2); seam connectors land in column j+2 / row i+2.
EMBED_OFFSET = 2


class PhiTrace(NamedTuple):
    result: PerfectMatching
    cycles: list[DiCycle]
    types: list[CycleType]
    first: int


def _check_phi(matching: PerfectMatching, result: PerfectMatching, first: DiCycle) -> None:
    if not validate(result):
        msg = "Φ(M) is not a perfect matching"
        raise PostconditionError(msg)
    if profile(result) != profile(matching):
        msg = "Φ(M) changed the profile"
        raise PostconditionError(msg)
    before, after = type_of(matching), type_of(result)
    if before.is_even:
        expected = cycle_type(first).upper()
        if after.is_even or after is not expected:
            msg = f"EE matching mapped to {after}, cycle type is {cycle_type(first)}"
            raise PostconditionError(msg)
    elif not after.is_even:
        msg = f"{before} matching mapped to {after} instead of EE"
        raise PostconditionError(msg)


def phi(matching: PerfectMatching, *, mode: VerificationMode = VerificationMode.VERIFY) -> PerfectMatching:
    """Φ(M) = M △ U(C_M).

    In verify mode the input is validated and the image is checked for
    validity, profile preservation and the type relation.
    """
    if mode == VerificationMode.VERIFY:
        require_valid(matching)
    first = canonical_first(build(matching))
    result = PerfectMatching(matching.dims, matching.edges ^ first.shadow)
    if mode == VerificationMode.VERIFY:
        _check_phi(matching, result, first)
    return result


def phi_trace(matching: PerfectMatching) -> PhiTrace:
    require_valid(matching)
    cycles = dicycles(build(matching))
    first = min(range(len(cycles)), key=lambda k: cycles[k].order_key)
    result = phi(matching)
    return PhiTrace(result, cycles, [cycle_type(c) for c in cycles], first)


def is_well_behaved(matching: PerfectMatching) -> bool:
    """C_M has no horizontal edge inside row 0 or m-1 and no vertical edge
    inside column 0 or n-1."""
    dims = matching.dims
    for edge in canonical_first(build(matching)).shadow:
        if edge.direction == Direction.HORIZONTAL and edge.origin.row in (0, dims.m - 1):
            return False
        if edge.direction == Direction.VERTICAL and edge.origin.col in (0, dims.n - 1):
            return False
    return True


def embed_well_behaved(matching: PerfectMatching) -> PerfectMatching:
    """Lift M to a well behaved M' on T_{m+4,n+4} with the same types.

    Non-seam edges shift by (+2, +2). A layer-A edge in column j becomes the
    A'-edge (m+3, j+2)-(0, j+2); a layer-B edge in row i becomes the B'-edge
    (i+2, n+3)-(i+2, 0). The border band is then filled: two vertical
    dominoes per column 2..n+1, two horizontal dominoes per row 2..m+1, and
    two vertical dominoes per 2x2 corner block.
    """
    require_valid(matching)
    dims = matching.dims
    m, n, k = dims.m, dims.n, EMBED_OFFSET
    big = TorusDims(m=m + 4, n=n + 4)
    V, H = Direction.VERTICAL, Direction.HORIZONTAL

    edges: set[GridEdge] = set()
    seam_cols: set[int] = set()
    seam_rows: set[int] = set()
    for edge in matching.edges:
        row, col = edge.origin
        if in_layer_a(dims, edge):
            seam_cols.add(col)
            edges.add(GridEdge(Node(m + 3, col + k), V))
        elif in_layer_b(dims, edge):
            seam_rows.add(row)
            edges.add(GridEdge(Node(row + k, n + 3), H))
        else:
            edges.add(GridEdge(Node(row + k, col + k), edge.direction))

    for col in range(n):
        top, bottom = (1, m + 1) if col in seam_cols else (0, m + 2)
        edges.update({GridEdge(Node(top, col + k), V), GridEdge(Node(bottom, col + k), V)})
    for row in range(m):
        left, right = (1, n + 1) if row in seam_rows else (0, n + 2)
        edges.update({GridEdge(Node(row + k, left), H), GridEdge(Node(row + k, right), H)})
    for row in (0, m + 2):
        for col in (0, 1, n + 2, n + 3):
            edges.add(GridEdge(Node(row, col), V))

    lifted = PerfectMatching(big, frozenset(edges))
    if not validate(lifted):
        msg = f"Embedding of a {dims} matching is not a perfect matching of {big}"
        raise ConstructionError(msg)
    if type_of(lifted) is not type_of(matching):
        msg = f"Embedding changed the matching type {type_of(matching)} -> {type_of(lifted)}"
        raise ConstructionError(msg)
    before = cycle_type(canonical_first(build(matching)))
    after = cycle_type(canonical_first(build(lifted)))
    if before is not after:
        msg = f"Embedding changed the first dicycle type {before} -> {after}"
        raise ConstructionError(msg)
    if not is_well_behaved(lifted):
        msg = "Embedding is not well behaved"
        raise ConstructionError(msg)
    logger.debug("Embedded matching", source=str(dims), target=str(big), type=type_of(lifted))
    return lifted

"""Perfect matchings of T_{m,n}: validation, enumeration, profiles, types, serde."""

from __future__ import annotations

import json
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, NamedTuple

from pydantic import BaseModel, ValidationError
from structlog import get_logger

from toroidal_matchings.lib.errors import InvalidInputError, MatchingParseError
from toroidal_matchings.lib.torus_grid import (
    Direction,
    GridEdge,
    Node,
    TorusDims,
    check_edge,
    in_layer_a,
    in_layer_b,
)
from toroidal_matchings.models import MatchType

logger = get_logger(__name__)


@dataclass(frozen=True)
class PerfectMatching:
    """An edge set of T_{m,n}; `validate` decides whether it is perfect."""

    dims: TorusDims
    edges: frozenset[GridEdge]

    @cached_property
    def partners(self) -> dict[Node, Node]:
        pairs: dict[Node, Node] = {}
        for edge in self.edges:
            u, v = edge.endpoints(self.dims)
            pairs[u] = v
            pairs[v] = u
        return pairs

    def sorted_edges(self) -> list[GridEdge]:
        return sorted(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


class Profile(NamedTuple):
    """Edges per horizontal cycle (h) and per vertical cycle (v)."""

    h: tuple[int, ...]
    v: tuple[int, ...]

    @property
    def positive(self) -> bool:
        return all(self.h) and all(self.v)

    def labels(self) -> tuple[str, str]:
        return " ".join(map(str, self.h)), " ".join(map(str, self.v))


def validate(matching: PerfectMatching) -> bool:
    """True iff every node of T_{m,n} is covered by exactly one edge."""
    dims = matching.dims
    covered: set[Node] = set()
    for edge in matching.edges:
        check_edge(dims, edge)
        for node in edge.endpoints(dims):
            if node in covered:
                return False
            covered.add(node)
    return len(covered) == dims.size


def require_valid(matching: PerfectMatching) -> PerfectMatching:
    if not validate(matching):
        msg = f"Edge set of size {len(matching)} is not a perfect matching of {matching.dims}"
        raise InvalidInputError(msg)
    return matching


def layer_counts(matching: PerfectMatching) -> tuple[int, int]:
    """(|M ∩ A|, |M ∩ B|)."""
    dims = matching.dims
    return (
        sum(1 for e in matching.edges if in_layer_a(dims, e)),
        sum(1 for e in matching.edges if in_layer_b(dims, e)),
    )


def type_of(matching: PerfectMatching) -> MatchType:
    return MatchType.from_parities(*layer_counts(matching))


def profile(matching: PerfectMatching) -> Profile:
    h = [0] * matching.dims.m
    v = [0] * matching.dims.n
    for edge in matching.edges:
        if edge.direction == Direction.HORIZONTAL:
            h[edge.origin.row] += 1
        else:
            v[edge.origin.col] += 1
    return Profile(tuple(h), tuple(v))


# -- enumeration ----------------------------------------------------------------


type _ChoiceTable = tuple[tuple[tuple[int, GridEdge], ...], ...]


def _choice_table(dims: TorusDims) -> _ChoiceTable:
    """Per node index: (partner index, edge) for right, down, left, up."""
    m, n = dims.m, dims.n
    table = []
    for row in range(m):
        for col in range(n):
            left, up = (col - 1) % n, (row - 1) % m
            table.append(
                (
                    (row * n + (col + 1) % n, GridEdge(Node(row, col), Direction.HORIZONTAL)),
                    (((row + 1) % m) * n + col, GridEdge(Node(row, col), Direction.VERTICAL)),
                    (row * n + left, GridEdge(Node(row, left), Direction.HORIZONTAL)),
                    (up * n + col, GridEdge(Node(up, col), Direction.VERTICAL)),
                )
            )
    return tuple(table)


def first_choices(dims: TorusDims) -> list[GridEdge]:
    """The four ways to match node (0,0), in enumeration order."""
    return [edge for _, edge in _choice_table(dims)[0]]


def _complete(
    table: _ChoiceTable,
    covered: bytearray,
    chosen: list[GridEdge],
    start: int,
) -> Iterator[tuple[GridEdge, ...]]:
    v = covered.find(0, start)
    if v < 0:
        yield tuple(chosen)
        return
    covered[v] = 1
    for u, edge in table[v]:
        if covered[u]:
            continue
        covered[u] = 1
        chosen.append(edge)
        yield from _complete(table, covered, chosen, v + 1)
        chosen.pop()
        covered[u] = 0
    covered[v] = 0


def enumerate_matchings(
    dims: TorusDims, first: GridEdge | None = None
) -> Iterator[PerfectMatching]:
    """Stream every perfect matching of T_{m,n} exactly once.

    Backtracks over nodes in row-major order, always matching the first
    uncovered node; choices are tried right, down, left, up. With `first`
    only the branch in which node (0,0) is matched by that edge is walked.
    """
    table = _choice_table(dims)
    covered = bytearray(dims.size)
    if first is None:
        stream = _complete(table, covered, [], 0)
    else:
        partner = next((u for u, e in table[0] if e == first), None)
        if partner is None:
            msg = f"Edge {first} does not cover node (0,0)"
            raise InvalidInputError(msg)
        covered[0] = covered[partner] = 1
        stream = _complete(table, covered, [first], 1)
    for edges in stream:
        yield PerfectMatching(dims, frozenset(edges))


# -- reference matchings ----------------------------------------------------------


def brick_matching(dims: TorusDims, shifted_rows: Sequence[int] = ()) -> PerfectMatching:
    """Horizontal dominoes pairing columns (0,1), (2,3), ... in every row.

    Rows listed in `shifted_rows` pair columns (1,2), (3,4), ..., (n-1,0).
    """
    edges = {
        GridEdge(Node(row, col + (row in shifted_rows)), Direction.HORIZONTAL)
        for row in range(dims.m)
        for col in range(0, dims.n, 2)
    }
    return PerfectMatching(dims, frozenset(edges))


def vertical_matching(dims: TorusDims, offset: int = 0) -> PerfectMatching:
    """Vertical dominoes pairing rows (offset, offset+1), ... in every column."""
    edges = {
        GridEdge(Node((row + offset) % dims.m, col), Direction.VERTICAL)
        for row in range(0, dims.m, 2)
        for col in range(dims.n)
    }
    return PerfectMatching(dims, frozenset(edges))


# -- serde -------------------------------------------------------------------------


class MatchingFile(BaseModel):
    """On-disk form: {"m":4,"n":6,"edges":[[i,j,"H"],...]}."""

    m: int
    n: int
    edges: list[tuple[int, int, Literal["H", "V"]]]


def to_payload(matching: PerfectMatching) -> dict[str, object]:
    return {
        "m": matching.dims.m,
        "n": matching.dims.n,
        "edges": [
            [e.origin.row, e.origin.col, e.direction.value] for e in matching.sorted_edges()
        ],
    }


def serialize(matching: PerfectMatching) -> str:
    return json.dumps(to_payload(matching), separators=(",", ":"))


def deserialize(text: str) -> PerfectMatching:
    try:
        parsed = MatchingFile.model_validate_json(text)
    except ValidationError as e:
        msg = f"Malformed matching text: {e.error_count()} error(s), first: {e.errors()[0]['msg']}"
        raise MatchingParseError(msg) from e
    try:
        dims = TorusDims(m=parsed.m, n=parsed.n)
    except ValidationError as e:
        msg = f"Invalid dimensions m={parsed.m}, n={parsed.n}"
        raise MatchingParseError(msg) from e

    edges = [GridEdge(Node(r, c), Direction(d)) for r, c, d in parsed.edges]
    if len(set(edges)) != len(edges):
        msg = "Matching text lists an edge twice"
        raise MatchingParseError(msg)
    matching = PerfectMatching(dims, frozenset(edges))
    try:
        ok = validate(matching)
    except InvalidInputError as e:
        raise MatchingParseError(str(e)) from e
    if not ok:
        msg = f"Edges do not form a perfect matching of {dims}"
        raise MatchingParseError(msg)
    return matching

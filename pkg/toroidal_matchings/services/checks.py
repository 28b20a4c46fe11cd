"""Per-matching checks run by the certification harness.

Every check is a predicate over `MatchingFacts`, which computes the digraph,
the dicycles and the image under Φ once and shares them between checks.
A check that raises counts as failed on that matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from structlog import get_logger

from toroidal_matchings.lib.bijection import embed_well_behaved, is_well_behaved, phi
from toroidal_matchings.lib.interfaces import PhiFn, Predicate
from toroidal_matchings.lib.matching import (
    PerfectMatching,
    deserialize,
    layer_counts,
    profile,
    serialize,
    type_of,
    validate,
)
from toroidal_matchings.lib.torus_grid import (
    Node,
    has_uniform_corner_parity,
    is_contractible,
    layer_parities,
    neighbors,
)
from toroidal_matchings.lib.transfer_digraph import (
    DiCycle,
    TransferDigraph,
    alternates,
    build,
    canonical_first,
    cycle_type,
    dicycles,
)
from toroidal_matchings.models import CycleType

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class MatchingFacts:
    matching: PerfectMatching
    phi_fn: PhiFn = phi

    @cached_property
    def digraph(self) -> TransferDigraph:
        return build(self.matching)

    @cached_property
    def cycles(self) -> list[DiCycle]:
        return dicycles(self.digraph)

    @cached_property
    def first(self) -> DiCycle:
        return canonical_first(self.digraph)

    @cached_property
    def image(self) -> PerfectMatching:
        return self.phi_fn(self.matching)


def _valid_matching(f: MatchingFacts) -> bool:
    return validate(f.matching)


def _profile_sum(f: MatchingFacts) -> bool:
    p = profile(f.matching)
    return 2 * (sum(p.h) + sum(p.v)) == f.matching.dims.size


def _serialization_roundtrip(f: MatchingFacts) -> bool:
    return deserialize(serialize(f.matching)) == f.matching


def _out_degree_one(f: MatchingFacts) -> bool:
    dims, succ = f.matching.dims, f.digraph.succ
    return len(succ) == dims.size and all(w in neighbors(dims, v) for v, w in succ.items())


def _path_parity_classes(f: MatchingFacts) -> bool:
    # Black nodes on a common directed path share a parity class. Each walk
    # runs into its cycle or on to a black node an earlier walk covered.
    visited: set[Node] = set()
    for start in f.digraph.succ:
        if start in visited:
            continue
        path = f.digraph.path_from(start, lambda w: w.is_black and w in visited)
        if len({v.parity_class for v in path if v.is_black}) > 1:
            return False
        visited.update(path)
    return True


def _dicycle_corner_parity(f: MatchingFacts) -> bool:
    return all(has_uniform_corner_parity(c.as_grid_cycle()) for c in f.cycles)


def _dicycles_disjoint(f: MatchingFacts) -> bool:
    nodes = [v for c in f.cycles for v in c.nodes]
    return len(nodes) == len(set(nodes))


def _no_ee_dicycle(f: MatchingFacts) -> bool:
    return all(cycle_type(c) is not CycleType.EE for c in f.cycles)


def _dicycles_noncontractible(f: MatchingFacts) -> bool:
    return not any(is_contractible(c.as_grid_cycle()) for c in f.cycles)


def _dicycle_alternation(f: MatchingFacts) -> bool:
    return all(alternates(c, f.matching) for c in f.cycles)


def _equal_dicycle_types(f: MatchingFacts) -> bool:
    return len({cycle_type(c) for c in f.cycles}) == 1


def _involution(f: MatchingFacts) -> bool:
    return f.phi_fn(f.image) == f.matching


def _profile_invariance(f: MatchingFacts) -> bool:
    return profile(f.image) == profile(f.matching)


def _type_mapping(f: MatchingFacts) -> bool:
    before, after = type_of(f.matching), type_of(f.image)
    if before.is_even:
        return after is cycle_type(f.first).upper()
    return after.is_even


def _cycle_type_matches_type(f: MatchingFacts) -> bool:
    kind = type_of(f.matching)
    return kind.is_even or cycle_type(f.first) is kind.lower()


def _layer_parity_bookkeeping(f: MatchingFacts) -> bool:
    dims = f.matching.dims
    a, b = layer_counts(f.matching)
    ca, cb = layer_parities(dims, f.first.shadow)
    return layer_parities(dims, f.image.edges) == ((a + ca) % 2, (b + cb) % 2)


def _well_behaved_embedding(f: MatchingFacts) -> bool:
    lifted = embed_well_behaved(f.matching)
    return (
        validate(lifted)
        and is_well_behaved(lifted)
        and type_of(lifted) is type_of(f.matching)
        and cycle_type(canonical_first(build(lifted))) is cycle_type(f.first)
    )


MATCHING_CHECKS: dict[str, Predicate[MatchingFacts]] = {
    "valid_matching": _valid_matching,
    "profile_sum": _profile_sum,
    "serialization_roundtrip": _serialization_roundtrip,
    "out_degree_one": _out_degree_one,
    "path_parity_classes": _path_parity_classes,
    "dicycle_corner_parity": _dicycle_corner_parity,
    "dicycles_disjoint": _dicycles_disjoint,
    "no_ee_dicycle": _no_ee_dicycle,
    "dicycles_noncontractible": _dicycles_noncontractible,
    "dicycle_alternation": _dicycle_alternation,
    "equal_dicycle_types": _equal_dicycle_types,
    "involution": _involution,
    "profile_invariance": _profile_invariance,
    "type_mapping": _type_mapping,
    "cycle_type_matches_type": _cycle_type_matches_type,
    "layer_parity_bookkeeping": _layer_parity_bookkeeping,
    "well_behaved_embedding": _well_behaved_embedding,
}


def run_check(name: str, facts: MatchingFacts) -> bool:
    try:
        return bool(MATCHING_CHECKS[name](facts))
    except Exception:
        logger.debug("Check raised", check=name, exc_info=True)
        return False


def replay(name: str, matching: PerfectMatching, phi_fn: PhiFn = phi) -> bool:
    """Run one named check on one matching, as recorded in a report."""
    if name not in MATCHING_CHECKS:
        msg = f"Unknown check {name!r}; per-matching checks are {sorted(MATCHING_CHECKS)}"
        raise KeyError(msg)
    return run_check(name, MatchingFacts(matching, phi_fn))

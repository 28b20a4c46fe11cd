"""Disk-interior checks on cycles whose corners share one parity class.

Such a cycle bounds a disk whose interior is connected and holds an odd
number of nodes.
"""

import random
from collections.abc import Iterable

from structlog import get_logger

from toroidal_matchings.lib.torus_grid import (
    GridCycle,
    TorusDims,
    disk_interior,
    interior_components,
    random_uniform_parity_cycle,
    uniform_parity_rectangles,
)
from toroidal_matchings.models import CheckResult

logger = get_logger(__name__)


def interior_is_odd_and_connected(cycle: GridCycle) -> bool:
    interior = disk_interior(cycle)
    return len(interior) % 2 == 1 and interior_components(cycle) == 1


def _check_cycles(name: str, cycles: Iterable[GridCycle]) -> CheckResult:
    examined = failures = 0
    counterexample: str | None = None
    for cycle in cycles:
        examined += 1
        try:
            ok = interior_is_odd_and_connected(cycle)
        except Exception:
            logger.debug("Interior check raised", check=name, exc_info=True)
            ok = False
        if not ok:
            failures += 1
            if counterexample is None:
                counterexample = " ".join(f"{v.row},{v.col}" for v in cycle.nodes)
    logger.info("Interior check finished", check=name, examined=examined, failures=failures)
    return CheckResult(
        name=name,
        passed=failures == 0,
        examined=examined,
        failures=failures,
        counterexample=counterexample,
    )


def rectangle_interiors(dims: TorusDims) -> CheckResult:
    return _check_cycles("rectangle_interiors", uniform_parity_rectangles(dims))


def random_cycle_interiors(dims: TorusDims, samples: int, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    return _check_cycles(
        "random_cycle_interiors",
        (random_uniform_parity_cycle(dims, rng) for _ in range(samples)),
    )

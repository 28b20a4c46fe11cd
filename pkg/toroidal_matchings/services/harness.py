"""Certification harness: count tables and the invariant suite over all matchings."""

from __future__ import annotations

import hashlib
import time
from collections import Counter
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import NamedTuple

import polars as pl
from pandera.typing.polars import DataFrame
from structlog import get_logger
from tqdm import tqdm

from toroidal_matchings.constants import LAYER_CONVENTION
from toroidal_matchings.lib.bijection import EMBED_OFFSET, phi
from toroidal_matchings.lib.config import HarnessConfig
from toroidal_matchings.lib.errors import GuardExceededError
from toroidal_matchings.lib.interfaces import PhiFn
from toroidal_matchings.lib.matching import (
    PerfectMatching,
    Profile,
    enumerate_matchings,
    first_choices,
    profile,
    serialize,
    type_of,
)
from toroidal_matchings.lib.pfaffian import (
    ORIENTATIONS,
    Flips,
    Orientation,
    count_from_pfaffians,
    determinant_exact,
    ee_sign,
    face_is_clockwise_odd,
    four_pfaffians,
    kasteleyn_matrix,
    matching_sign,
    normalized_pfaffians,
    sign_combinations,
    vanishing_orientations,
)
from toroidal_matchings.lib.sampling import sample_matchings
from toroidal_matchings.lib.torus_grid import GridEdge, TorusDims
from toroidal_matchings.models import (
    CertificationReport,
    CheckResult,
    CountTableRow,
    MatchType,
)
from toroidal_matchings.services.checks import (
    MATCHING_CHECKS,
    MatchingFacts,
    run_check,
)
from toroidal_matchings.services.interiors import (
    random_cycle_interiors,
    rectangle_interiors,
)

logger = get_logger(__name__)

type CellKey = tuple[Profile, MatchType]

COUNT_TABLE_SCHEMA = {
    "h": pl.String,
    "v": pl.String,
    "EE": pl.UInt64,
    "EO": pl.UInt64,
    "OE": pl.UInt64,
    "OO": pl.UInt64,
    "positive": pl.Boolean,
}


class Certification(NamedTuple):
    report: CertificationReport
    table: DataFrame[CountTableRow]


@dataclass(frozen=True)
class ScanPlan:
    """What to do with every matching of a run. Must stay picklable."""

    phi_fn: PhiFn | None = None
    signs: bool = False
    vanishing: Flips | None = None
    dedupe: bool = False
    timings: bool = False


@dataclass
class PartitionScan:
    examined: int = 0
    cells: Counter[CellKey] = field(default_factory=Counter)
    failures: Counter[str] = field(default_factory=Counter)
    counterexamples: dict[str, str] = field(default_factory=dict)
    seconds: Counter[str] = field(default_factory=Counter)
    signed_sums: Counter[Flips] = field(default_factory=Counter)
    vanishing_cells: Counter[Profile] = field(default_factory=Counter)
    ee_ratios: set[int] = field(default_factory=set)
    duplicates: int = 0

    def merge(self, later: PartitionScan) -> None:
        """Fold in the scan of a partition that comes later in enumeration order."""
        self.examined += later.examined
        self.cells.update(later.cells)
        self.failures.update(later.failures)
        for name, text in later.counterexamples.items():
            self.counterexamples.setdefault(name, text)
        self.seconds.update(later.seconds)
        self.signed_sums.update(later.signed_sums)
        self.vanishing_cells.update(later.vanishing_cells)
        self.ee_ratios |= later.ee_ratios
        self.duplicates += later.duplicates


def _scan_stream(dims: TorusDims, matchings: Iterable[PerfectMatching], plan: ScanPlan) -> PartitionScan:
    scan = PartitionScan()
    orientations = [Orientation(dims, *q) for q in ORIENTATIONS] if plan.signs else []
    seen: set[bytes] = set()
    for matching in matchings:
        scan.examined += 1
        cell = profile(matching)
        scan.cells[(cell, type_of(matching))] += 1

        if plan.dedupe:
            digest = hashlib.blake2b(serialize(matching).encode(), digest_size=16).digest()
            if digest in seen:
                scan.duplicates += 1
            seen.add(digest)

        for orientation in orientations:
            sign = matching_sign(matching, orientation)
            scan.signed_sums[orientation.flips] += sign
            if orientation.flips == plan.vanishing:
                scan.vanishing_cells[cell] += sign
                scan.ee_ratios.add(sign * ee_sign(matching))

        if plan.phi_fn is None:
            continue
        facts = MatchingFacts(matching, plan.phi_fn)
        for name in MATCHING_CHECKS:
            started = time.perf_counter()
            ok = run_check(name, facts)
            if plan.timings:
                scan.seconds[name] += time.perf_counter() - started
            if not ok:
                scan.failures[name] += 1
                scan.counterexamples.setdefault(name, serialize(matching))
    return scan


def _scan_partition(dims: TorusDims, first: GridEdge, plan: ScanPlan) -> PartitionScan:
    return _scan_stream(dims, enumerate_matchings(dims, first), plan)


def _run_partitions(dims: TorusDims, plan: ScanPlan, threads: int) -> PartitionScan:
    """Enumerate every matching, split on how node (0,0) is matched.

    Partitions are merged in enumeration order whatever the worker count,
    so the first counterexample of each check is the same for any threads.
    """
    firsts = first_choices(dims)
    worker = partial(_scan_partition, dims, plan=plan)
    progress = partial(tqdm, total=len(firsts), desc=f"Enumerating {dims}", unit="branch", disable=None)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(firsts))) as pool:
            scans = list(progress(pool.map(worker, firsts)))
    else:
        scans = [worker(first) for first in progress(firsts)]

    total = PartitionScan()
    for scan in scans:
        total.merge(scan)
    logger.info("Enumeration finished", dims=str(dims), total=total.examined, threads=threads)
    return total


def _require_desk_scale(dims: TorusDims, config: HarnessConfig) -> None:
    if config.exhaustive and dims.size > config.guard:
        msg = (
            f"Exhaustive run on {dims} has m*n = {dims.size} above the guard {config.guard}; "
            "raise TORUS_MATCH_GUARD or sample instead"
        )
        raise GuardExceededError(msg)


def table_from_cells(cells: Counter[CellKey]) -> DataFrame[CountTableRow]:
    rows = []
    for cell in sorted({p for p, _ in cells}):
        h, v = cell.labels()
        counts = {kind.value: cells[(cell, kind)] for kind in MatchType}
        rows.append({"h": h, "v": v, **counts, "positive": cell.positive})
    return CountTableRow.validate(pl.DataFrame(rows, schema=COUNT_TABLE_SCHEMA))


def count_table(dims: TorusDims, config: HarnessConfig | None = None) -> DataFrame[CountTableRow]:
    """Exact per-profile, per-type counts from exhaustive enumeration."""
    config = config or HarnessConfig.from_env()
    _require_desk_scale(dims, config.model_copy(update={"sample_size": None}))
    scan = _run_partitions(dims, ScanPlan(), config.threads)
    return table_from_cells(scan.cells)


def write_count_table(table: DataFrame[CountTableRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    table.write_csv(path)
    logger.info("Wrote count table", path=str(path), rows=table.height)


def _edge_total(column: str) -> pl.Expr:
    return pl.col(column).str.split(" ").list.eval(pl.element().cast(pl.Int64)).list.sum()


def edge_total_table(table: DataFrame[CountTableRow]) -> pl.DataFrame:
    """Even against odd matchings per (vertical edges, horizontal edges) total."""
    return (
        table.with_columns(vertical=_edge_total("v"), horizontal=_edge_total("h"))
        .group_by("vertical", "horizontal")
        .agg(
            even=pl.col("EE").sum(),
            odd=(pl.col("EO") + pl.col("OE") + pl.col("OO")).sum(),
        )
        .sort("vertical", "horizontal")
    )


def _result(
    name: str, examined: int, failures: int, counterexample: str | None = None
) -> CheckResult:
    return CheckResult(
        name=name,
        passed=failures == 0,
        examined=examined,
        failures=failures,
        counterexample=counterexample,
    )


def _timed(config: HarnessConfig, make: Callable[[], CheckResult]) -> CheckResult:
    started = time.perf_counter()
    result = make()
    if not config.timings:
        return result
    return result.model_copy(update={"seconds": round(time.perf_counter() - started, 6)})


def _cancellation(table: DataFrame[CountTableRow]) -> tuple[CheckResult, dict[str, int | bool]]:
    odd = pl.col("EO") + pl.col("OE") + pl.col("OO")
    broken = table.filter(pl.col("EE") != odd)
    counterexample = None
    if broken.height:
        row = broken.row(0, named=True)
        counterexample = f"h={row['h']} v={row['v']}"
    zero_entry = table.filter(~pl.col("positive"))
    observations = {
        "profile_cells": table.height,
        "zero_entry_profile_cells": zero_entry.height,
        "cancellation_fails_on_positive_profiles": broken.filter(pl.col("positive")).height,
        "cancellation_fails_on_zero_entry_profiles": broken.filter(~pl.col("positive")).height,
    }
    return _result("cancellation_identity", table.height, broken.height, counterexample), observations


def _edge_total_check(table: DataFrame[CountTableRow]) -> tuple[CheckResult, int]:
    totals = edge_total_table(table)
    broken = totals.filter(pl.col("even") != pl.col("odd"))
    counterexample = None
    if broken.height:
        row = broken.row(0, named=True)
        counterexample = f"vertical={row['vertical']} horizontal={row['horizontal']}"
    result = _result("cancellation_by_edge_totals", totals.height, broken.height, counterexample)
    return result, totals.height


def _face_check(dims: TorusDims) -> CheckResult:
    failures = 0
    counterexample = None
    for q in ORIENTATIONS:
        orientation = Orientation(dims, *q)
        for top in range(dims.m):
            for left in range(dims.n):
                if not face_is_clockwise_odd(orientation, top, left):
                    failures += 1
                    counterexample = counterexample or f"flips={q} face=({top},{left})"
    return _result("kasteleyn_faces_clockwise_odd", 4 * dims.size, failures, counterexample)


def _label(q: Flips) -> str:
    return f"{q[0]}{q[1]}"


def certify(
    dims: TorusDims,
    config: HarnessConfig | None = None,
    phi_fn: PhiFn | None = None,
) -> Certification:
    """Run the full invariant suite over every matching of `dims`.

    With `config.sample_size` set, a deterministic sample is checked instead
    and the checks that need the whole set of matchings are skipped.
    Failures are data: nothing here raises for a failed check.
    """
    config = config or HarnessConfig.from_env()
    _require_desk_scale(dims, config)
    phi_fn = phi_fn or partial(phi, mode=config.mode)

    logger.info(
        "Starting certification",
        dims=str(dims),
        exhaustive=config.exhaustive,
        threads=config.threads,
        mode=config.mode,
    )
    started = time.perf_counter()

    exact_pfaffians = dims.size <= config.pfaffian_limit
    pfaffians = four_pfaffians(dims) if exact_pfaffians else {}
    vanishing = vanishing_orientations(pfaffians)
    plan = ScanPlan(
        phi_fn=phi_fn,
        signs=exact_pfaffians,
        vanishing=vanishing[0] if len(vanishing) == 1 else None,
        dedupe=config.exhaustive,
        timings=config.timings,
    )
    if config.exhaustive:
        scan = _run_partitions(dims, plan, config.threads)
    else:
        sample = sample_matchings(dims, config.sample_size, config.seed)
        scan = _scan_stream(dims, tqdm(sample, total=config.sample_size, desc=f"Sampling {dims}", disable=None), plan)

    checks = [
        CheckResult(
            name=name,
            passed=scan.failures[name] == 0,
            examined=scan.examined,
            failures=scan.failures[name],
            counterexample=scan.counterexamples.get(name),
            seconds=round(scan.seconds[name], 6) if config.timings else None,
        )
        for name in MATCHING_CHECKS
    ]
    table = table_from_cells(scan.cells)
    observations: dict[str, str | int | bool | None] = {}
    if exact_pfaffians:
        observations |= {f"pfaffian_{_label(q)}": value for q, value in pfaffians.items()}
        observations |= {
            f"normalized_pfaffian_{_label(q)}": value
            for q, value in normalized_pfaffians(dims, pfaffians).items()
        }
        observations["vanishing_orientation"] = (
            _label(plan.vanishing) if plan.vanishing is not None else None
        )
    else:
        observations["pfaffian_checks"] = f"skipped above m*n = {config.pfaffian_limit}"
        logger.info("Skipping exact Pfaffian checks", dims=str(dims), limit=config.pfaffian_limit)
    observations["embed_connector_offset"] = EMBED_OFFSET

    if exact_pfaffians:
        checks.append(
            _timed(config, lambda: _result("pfaffian_single_vanishing", 4, int(len(vanishing) != 1)))
        )

        def squares() -> CheckResult:
            bad = [
                q for q in ORIENTATIONS
                if pfaffians[q] ** 2 != determinant_exact(kasteleyn_matrix(dims, *q))
            ]
            return _result(
                "pfaffian_squares_determinant", 4, len(bad), f"flips={bad[0]}" if bad else None
            )

        checks.append(_timed(config, squares))
    checks.append(_timed(config, lambda: _face_check(dims)))

    if plan.vanishing is not None:
        realized = next(iter(scan.ee_ratios)) if len(scan.ee_ratios) == 1 else None
        observations["realized_sign"] = realized
        checks.append(
            _result("vanishing_sign_relation", scan.examined, int(realized is None))
        )

    if config.exhaustive:
        checks.append(_result("distinct_matchings", scan.examined, scan.duplicates))
        cancellation, table_notes = _cancellation(table)
        checks.append(cancellation)
        observations |= table_notes
        by_totals, classes = _edge_total_check(table)
        checks.append(by_totals)
        observations["edge_total_classes"] = classes

    if config.exhaustive and exact_pfaffians:
        bad_sums = [q for q in ORIENTATIONS if scan.signed_sums[q] != pfaffians[q]]
        checks.append(
            _result(
                "pfaffian_signed_sums",
                4,
                len(bad_sums),
                f"flips={bad_sums[0]}" if bad_sums else None,
            )
        )
        try:
            derived = count_from_pfaffians(dims, pfaffians)
        except ArithmeticError:
            derived = None
        observations["pfaffian_count"] = derived
        checks.append(
            _result("pfaffian_count_agreement", 1, int(derived != scan.examined))
        )
        combinations = sign_combinations(pfaffians, scan.examined)
        observations["sign_combinations"] = " ".join(
            "".join("+" if e > 0 else "-" for e in eps) for eps in combinations
        )
        checks.append(_result("pfaffian_sign_combination", 16, int(not combinations)))
        if plan.vanishing is not None:
            uncancelled = [cell for cell, total in scan.vanishing_cells.items() if total]
            counterexample = None
            if uncancelled:
                h, v = min(uncancelled).labels()
                counterexample = f"h={h} v={v}"
            checks.append(
                _result(
                    "vanishing_cells_cancel",
                    len(scan.vanishing_cells),
                    len(uncancelled),
                    counterexample,
                )
            )

    checks.append(_timed(config, lambda: rectangle_interiors(dims)))
    if config.interior_samples:
        checks.append(
            _timed(config, lambda: random_cycle_interiors(dims, config.interior_samples, config.seed))
        )

    if not config.exhaustive:
        observations["sample_seed"] = config.seed
    if config.timings:
        observations["seconds_total"] = str(round(time.perf_counter() - started, 3))

    report = CertificationReport(
        m=dims.m,
        n=dims.n,
        exhaustive=config.exhaustive,
        matchings=scan.examined,
        layer_convention=LAYER_CONVENTION,
        checks=checks,
        observations=observations,
    )
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning("Certification failed", dims=str(dims), failed=failed)
    else:
        logger.info("Certification passed", dims=str(dims), checks=len(checks), matchings=scan.examined)
    return Certification(report, table)

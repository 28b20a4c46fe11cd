"""Command line interface: enumeration, Φ, certification, Pfaffians, embedding.

Data goes to stdout as JSON (or CSV for count tables); diagnostics go to
stderr. Exit codes: 0 success, 1 failed certification or inconsistent
Pfaffians, 2 usage error (bad dimensions, guard or Pfaffian limit refusal),
3 malformed or undecodable matching file.
"""

import json
from pathlib import Path
from typing import TextIO

import click
from pydantic import ValidationError
from structlog import get_logger

from toroidal_matchings.lib.bijection import EMBED_OFFSET, embed_well_behaved, phi, phi_trace
from toroidal_matchings.lib.config import HarnessConfig, VerificationMode
from toroidal_matchings.lib.errors import GuardExceededError, MatchingParseError
from toroidal_matchings.lib.log import configure_logging
from toroidal_matchings.lib.matching import (
    PerfectMatching,
    deserialize,
    enumerate_matchings,
    serialize,
    to_payload,
)
from toroidal_matchings.lib.pfaffian import (
    ORIENTATIONS,
    Orientation,
    count_from_pfaffians,
    four_pfaffians,
    normalized_pfaffians,
    sign_combinations,
    signed_matching_sum,
    vanishing_orientations,
)
from toroidal_matchings.lib.torus_grid import TorusDims
from toroidal_matchings.services.harness import certify as run_certification
from toroidal_matchings.services.harness import count_table, edge_total_table, write_count_table

logger = get_logger(__name__)


class MatchingFileError(click.ClickException):
    exit_code = 3


def _dims(m: int, n: int) -> TorusDims:
    try:
        return TorusDims(m=m, n=n)
    except ValidationError as e:
        msg = "; ".join(err["msg"] for err in e.errors())
        raise click.UsageError(f"Invalid grid T_{{{m},{n}}}: {msg}") from e


def _read_matching(source: TextIO) -> PerfectMatching:
    try:
        return deserialize(source.read())
    except UnicodeDecodeError as e:
        msg = f"Matching file is not valid text: {e.reason} at byte {e.start}"
        raise MatchingFileError(msg) from e
    except MatchingParseError as e:
        raise MatchingFileError(str(e)) from e


def _emit(payload: object) -> None:
    click.echo(json.dumps(payload, separators=(",", ":")))


def _flips(q: tuple[int, int]) -> str:
    return f"{q[0]}{q[1]}"


dims_options = [
    click.option("--m", "m", type=int, required=True, help="Number of rows (even, >= 4)"),
    click.option("--n", "n", type=int, required=True, help="Number of columns (even, >= 4)"),
]


def with_dims(func):
    for option in reversed(dims_options):
        func = option(func)
    return func


@click.group()
@click.option("--verbose", is_flag=True, help="Log progress at INFO level on stderr")
def cli(verbose: bool):
    """Perfect matchings of toroidal grids: the even/odd bijection and its checks."""
    configure_logging("INFO" if verbose else None)


@cli.command(name="enum")
@with_dims
@click.option("--by-profile", is_flag=True, help="Break counts down by profile (h, v)")
@click.option("--by-edge-totals", is_flag=True, help="Even and odd counts per number of vertical and horizontal edges")
@click.option("--json", "fmt", flag_value="json", default=True, help="JSON output (default)")
@click.option("--csv", "fmt", flag_value="csv", help="CSV count table")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker processes")
def enum_command(
    m: int, n: int, by_profile: bool, by_edge_totals: bool, fmt: str, threads: int | None
):
    """Count the perfect matchings of T_{m,n} by type."""
    dims = _dims(m, n)
    config = HarnessConfig.from_env(threads=threads)
    try:
        table = count_table(dims, config)
    except GuardExceededError as e:
        raise click.UsageError(str(e)) from e

    if fmt == "csv":
        click.echo(table.write_csv(), nl=False)
        return
    types = {kind: int(table[kind].sum()) for kind in ("EE", "EO", "OE", "OO")}
    payload: dict[str, object] = {
        "m": m,
        "n": n,
        "total": sum(types.values()),
        "types": types,
    }
    if by_profile:
        payload["cells"] = table.to_dicts()
    if by_edge_totals:
        payload["edge_totals"] = edge_total_table(table).to_dicts()
    _emit(payload)


@cli.command(name="phi")
@click.option("--input", "source", type=click.File("r"), required=True, help="Matching file ('-' for stdin)")
@click.option("--trace", is_flag=True, help="Include every dicycle and the chosen one")
@click.option("--fast", is_flag=True, help="Skip the postcondition checks")
def phi_command(source: TextIO, trace: bool, fast: bool):
    """Apply Φ(M) = M △ U(C_M) to a matching file."""
    matching = _read_matching(source)
    if not trace:
        mode = VerificationMode.FAST if fast else VerificationMode.VERIFY
        click.echo(serialize(phi(matching, mode=mode)))
        return
    traced = phi_trace(matching)
    payload = to_payload(traced.result)
    payload["trace"] = {
        "first": traced.first,
        "cycles": [
            {"type": kind.value, "nodes": [[v.row, v.col] for v in cycle.nodes]}
            for cycle, kind in zip(traced.cycles, traced.types, strict=True)
        ],
    }
    _emit(payload)


@cli.command(name="embed")
@click.option("--input", "source", type=click.File("r"), required=True, help="Matching file ('-' for stdin)")
def embed_command(source: TextIO):
    """Lift a matching to a well behaved matching of T_{m+4,n+4}."""
    matching = _read_matching(source)
    lifted = embed_well_behaved(matching)
    payload = to_payload(lifted)
    payload["embedding"] = {
        "source": [matching.dims.m, matching.dims.n],
        "shift": [EMBED_OFFSET, EMBED_OFFSET],
        "a_connector_column": f"j+{EMBED_OFFSET}",
        "b_connector_row": f"i+{EMBED_OFFSET}",
    }
    _emit(payload)


@cli.command(name="pfaffian")
@with_dims
@click.option("--brute-force", is_flag=True, help="Also sum matching signs by enumeration")
def pfaffian_command(m: int, n: int, brute_force: bool):
    """Report the four Kasteleyn Pfaffians and the vanishing orientation."""
    dims = _dims(m, n)
    config = HarnessConfig.from_env()
    if dims.size > config.pfaffian_limit:
        msg = (
            f"Exact Pfaffians on {dims} exceed the limit m*n <= {config.pfaffian_limit}; "
            "raise TORUS_MATCH_PFAFFIAN_LIMIT to run them anyway"
        )
        raise click.UsageError(msg)
    pfaffians = four_pfaffians(dims)
    try:
        count = count_from_pfaffians(dims, pfaffians)
    except ArithmeticError as e:
        raise click.ClickException(str(e)) from e
    payload: dict[str, object] = {
        "m": m,
        "n": n,
        "pfaffians": {_flips(q): v for q, v in pfaffians.items()},
        "normalized": {_flips(q): v for q, v in normalized_pfaffians(dims, pfaffians).items()},
        "vanishing": [_flips(q) for q in vanishing_orientations(pfaffians)],
        "count": count,
        "sign_combinations": [list(eps) for eps in sign_combinations(pfaffians, count)],
    }
    if brute_force:
        if dims.size > config.guard:
            msg = f"Brute-force signed sums on {dims} exceed the guard {config.guard}"
            raise click.UsageError(msg)
        payload["signed_sums"] = {
            _flips(q): signed_matching_sum(dims, Orientation(dims, *q), enumerate_matchings(dims))
            for q in ORIENTATIONS
        }
    _emit(payload)


@cli.command(name="certify")
@with_dims
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--sample", "sample_size", type=click.IntRange(min=1), default=None, help="Check a seeded sample instead of every matching")
@click.option("--seed", type=int, default=None, help="Seed for sampling and random cycles")
@click.option("--interior-samples", type=click.IntRange(min=0), default=None, help="Random cycles for the interior checks")
@click.option("--fast", is_flag=True, help="Skip Φ's own postcondition checks")
@click.option("--timings", is_flag=True, help="Report wall-clock per check")
@click.option("--table", "table_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Also write the count table as CSV")
@click.pass_context
def certify_command(
    ctx: click.Context,
    m: int,
    n: int,
    threads: int | None,
    sample_size: int | None,
    seed: int | None,
    interior_samples: int | None,
    fast: bool,
    timings: bool,
    table_path: Path | None,
):
    """Run every check over the matchings of T_{m,n}; exit 1 on any failure."""
    dims = _dims(m, n)
    config = HarnessConfig.from_env(
        threads=threads,
        sample_size=sample_size,
        seed=seed,
        interior_samples=interior_samples,
        mode=VerificationMode.FAST if fast else None,
        timings=timings or None,
    )
    try:
        certification = run_certification(dims, config)
    except GuardExceededError as e:
        raise click.UsageError(str(e)) from e

    if table_path is not None:
        write_count_table(certification.table, table_path)
    click.echo(certification.report.model_dump_json(indent=2))
    if not certification.report.passed:
        ctx.exit(1)

"""Tests for count tables, certification and replay of counterexamples."""

import polars as pl
import pytest

from toroidal_matchings.lib.config import HarnessConfig, VerificationMode
from toroidal_matchings.lib.errors import GuardExceededError
from toroidal_matchings.lib.matching import PerfectMatching, brick_matching, deserialize
from toroidal_matchings.lib.pfaffian import count_from_pfaffians
from toroidal_matchings.lib.torus_grid import TorusDims
from toroidal_matchings.lib.transfer_digraph import build, canonical_first
from toroidal_matchings.models import CertificationReport
from toroidal_matchings.services.checks import MATCHING_CHECKS, replay
from toroidal_matchings.services.harness import (
    certify,
    count_table,
    edge_total_table,
    write_count_table,
)
from toroidal_matchings.services.interiors import random_cycle_interiors, rectangle_interiors

T44 = TorusDims(m=4, n=4)
T46 = TorusDims(m=4, n=6)


def skip_one_edge_phi(matching: PerfectMatching) -> PerfectMatching:
    """Φ with one non-matching edge of U(C_M) left out of the symmetric difference."""
    shadow = canonical_first(build(matching)).shadow
    skipped = min(shadow - matching.edges)
    return PerfectMatching(matching.dims, matching.edges ^ (shadow - {skipped}))


@pytest.fixture()
def config() -> HarnessConfig:
    return HarnessConfig(interior_samples=25)


class TestCountTable:
    def test_cancellation_in_every_cell(self, config: HarnessConfig) -> None:
        table = count_table(T44, config)
        odd = table["EO"] + table["OE"] + table["OO"]
        assert (table["EE"] == odd).all()

    def test_totals_match_pfaffian_count(self, config: HarnessConfig) -> None:
        table = count_table(T46, config)
        total = sum(int(table[kind].sum()) for kind in ("EE", "EO", "OE", "OO"))
        assert total == count_from_pfaffians(T46)

    def test_brick_profile_cell_is_populated(self, config: HarnessConfig) -> None:
        table = count_table(T44, config)
        cell = table.filter((pl.col("h") == "2 2 2 2") & (pl.col("v") == "0 0 0 0"))
        assert cell.height == 1
        assert cell["EE"][0] >= 1
        assert not cell["positive"][0]

    @pytest.mark.slow
    def test_cancellation_on_t66(self) -> None:
        table = count_table(TorusDims(m=6, n=6), HarnessConfig(threads=2))
        odd = table["EO"] + table["OE"] + table["OO"]
        assert (table["EE"] == odd).all()
        assert table["positive"].any()

    def test_edge_totals_cancel(self, config: HarnessConfig) -> None:
        totals = edge_total_table(count_table(T44, config))
        assert (totals["even"] == totals["odd"]).all()
        assert (totals["vertical"] + totals["horizontal"] == T44.size // 2).all()
        assert int(totals["even"].sum() + totals["odd"].sum()) == count_from_pfaffians(T44)

    def test_guard(self) -> None:
        with pytest.raises(GuardExceededError):
            count_table(T44, HarnessConfig(guard=8))

    def test_csv_columns(self, tmp_path, config: HarnessConfig) -> None:
        path = tmp_path / "tables" / "t44.csv"
        write_count_table(count_table(T44, config), path)
        header = path.read_text().splitlines()[0]
        assert header == "h,v,EE,EO,OE,OO,positive"


class TestCertify:
    def test_t44_passes(self, config: HarnessConfig) -> None:
        report = certify(T44, config).report
        assert report.passed, [c for c in report.checks if not c.passed]
        assert report.matchings == count_from_pfaffians(T44)
        names = {check.name for check in report.checks}
        assert set(MATCHING_CHECKS) <= names
        assert {
            "cancellation_identity",
            "cancellation_by_edge_totals",
            "pfaffian_count_agreement",
            "rectangle_interiors",
        } <= names
        assert report.observations["realized_sign"] in (-1, 1)
        assert report.layer_convention.startswith("A: vertical")

    @pytest.mark.slow
    def test_t46_passes(self, config: HarnessConfig) -> None:
        assert certify(T46, config).report.passed

    def test_fast_mode_passes(self) -> None:
        config = HarnessConfig(interior_samples=0, mode=VerificationMode.FAST)
        assert certify(T44, config).report.passed

    def test_report_is_identical_across_runs_and_workers(self, config: HarnessConfig) -> None:
        first = certify(T44, config).report.model_dump_json(indent=2)
        second = certify(T44, config).report.model_dump_json(indent=2)
        parallel = certify(T44, config.model_copy(update={"threads": 2})).report.model_dump_json(indent=2)
        assert first == second == parallel

    def test_report_round_trips(self, config: HarnessConfig) -> None:
        report = certify(T44, config).report
        assert CertificationReport.model_validate_json(report.model_dump_json()) == report

    def test_timings_only_when_asked(self) -> None:
        quiet = certify(T44, HarnessConfig(interior_samples=0)).report
        timed = certify(T44, HarnessConfig(interior_samples=0, timings=True)).report
        assert all(check.seconds is None for check in quiet.checks)
        assert all(check.seconds is not None for check in timed.checks if check.name in MATCHING_CHECKS)

    def test_sampling_beyond_the_guard(self) -> None:
        dims = TorusDims(m=6, n=6)
        config = HarnessConfig(guard=16, sample_size=15, seed=11, interior_samples=10)
        report = certify(dims, config).report
        assert not report.exhaustive
        assert report.matchings == 15
        assert report.passed
        assert "cancellation_identity" not in {check.name for check in report.checks}

    def test_pfaffian_checks_skipped_above_the_limit(self) -> None:
        config = HarnessConfig(guard=16, sample_size=5, seed=2, interior_samples=0, pfaffian_limit=16)
        report = certify(TorusDims(m=6, n=6), config).report
        names = {check.name for check in report.checks}
        assert report.passed
        assert not names & {"pfaffian_single_vanishing", "pfaffian_squares_determinant"}
        assert "kasteleyn_faces_clockwise_odd" in names
        assert report.observations["pfaffian_checks"] == "skipped above m*n = 16"

    def test_guard_without_sampling(self) -> None:
        with pytest.raises(GuardExceededError):
            certify(TorusDims(m=6, n=6), HarnessConfig(guard=16))


class TestMutation:
    def test_corrupted_phi_is_caught(self, config: HarnessConfig) -> None:
        report = certify(T44, config, phi_fn=skip_one_edge_phi).report
        involution = next(check for check in report.checks if check.name == "involution")
        assert not report.passed
        assert not involution.passed
        assert involution.failures == report.matchings
        assert involution.counterexample is not None

    def test_counterexample_replays(self, config: HarnessConfig) -> None:
        report = certify(T44, config, phi_fn=skip_one_edge_phi).report
        failing = [check for check in report.checks if check.name in MATCHING_CHECKS and not check.passed]
        assert failing
        for check in failing:
            matching = deserialize(check.counterexample)
            assert not replay(check.name, matching, skip_one_edge_phi)
            assert replay(check.name, matching)

    def test_first_counterexample_is_first_in_enumeration_order(self, config: HarnessConfig) -> None:
        report = certify(T44, config, phi_fn=skip_one_edge_phi).report
        involution = next(check for check in report.checks if check.name == "involution")
        # The very first matching enumerated is the brick matching.
        assert deserialize(involution.counterexample) == brick_matching(T44)

    def test_unknown_check(self) -> None:
        with pytest.raises(KeyError):
            replay("no_such_check", brick_matching(T44))


class TestInteriors:
    def test_rectangles(self) -> None:
        result = rectangle_interiors(TorusDims(m=6, n=6))
        assert result.passed
        assert result.examined == 4 * 36

    def test_random_cycles(self) -> None:
        result = random_cycle_interiors(TorusDims(m=8, n=8), samples=200, seed=5)
        assert result.passed
        assert result.examined == 200

    @pytest.mark.slow
    @pytest.mark.parametrize("dims", [TorusDims(m=6, n=6), TorusDims(m=8, n=8)], ids=str)
    def test_a_thousand_random_cycles(self, dims: TorusDims) -> None:
        result = random_cycle_interiors(dims, samples=1000, seed=0)
        assert result.passed, result.counterexample
        assert result.examined == 1000

from dataclasses import replace
from fractions import Fraction

import pandas as pd
import pytest

from src.exceptions import InputError
from src.geometry import CAKE, EMPTY, Piece
from src.protocol import Allocation, Transcript, run
from src.valuation import StepDensity
from src.verify import (
    CHECKS,
    EnvyReport,
    audit_transcript,
    check_envy_free,
    check_partition,
    format_report,
    matches_replay,
    numeric_crosscheck,
    verify_run,
)

from .tamper import TAMPER_MODES

F = Fraction


def P(*pairs):
    return Piece.from_pairs(pairs)


def quarters(n=4):
    return Allocation({i: P((F(i - 1, n), F(i, n))) for i in range(1, n + 1)}, EMPTY)


@pytest.fixture(scope="module")
def opposed_run():
    left = StepDensity.normalized([0, F(1, 2), 1], [3, 1])
    right = StepDensity.normalized([0, F(1, 2), 1], [1, 3])
    densities = [left, right, StepDensity.uniform(), StepDensity.uniform()]
    allocation, transcript = run(densities)
    return densities, allocation, transcript


class TestEnvy:
    def test_uniform_quarters(self, uniform4):
        report = check_envy_free(quarters(), uniform4)
        assert report.envy_free
        assert all(v == F(1, 4) for row in report.matrix for v in row)

    def test_owner_of_everything_envies_everyone(self, uniform4):
        allocation = Allocation({1: CAKE, 2: EMPTY, 3: EMPTY, 4: EMPTY}, EMPTY)
        report = check_envy_free(allocation, uniform4)
        assert report.violations == ((1, 2), (1, 3), (1, 4))

    def test_swapping_shares_creates_envy(self):
        left = StepDensity.normalized([0, F(1, 2), 1], [3, 1])
        right = StepDensity.normalized([0, F(1, 2), 1], [1, 3])
        densities = [left, right, StepDensity.uniform(), StepDensity.uniform()]
        shares = {1: P((F(1, 2), F(3, 4))), 2: P((0, F(1, 4))), 3: P((F(1, 4), F(1, 2))), 4: P((F(3, 4), 1))}
        assert check_envy_free(Allocation(shares, EMPTY), densities).envy_free
        shares[1], shares[2] = shares[2], shares[1]
        report = check_envy_free(Allocation(shares, EMPTY), densities)
        assert (1, 2) in report.violations and (2, 1) in report.violations

    def test_frame(self, uniform4):
        df = check_envy_free(quarters(), uniform4).frame()
        assert isinstance(df, pd.DataFrame)
        assert df.shape == (4, 4)
        assert df.loc[2, 3] == pytest.approx(0.25)


class TestPartition:
    def test_quarters(self):
        assert check_partition(quarters())

    def test_dropped_interval(self):
        shares = dict(quarters().shares)
        shares[3] = EMPTY
        assert not check_partition(Allocation(shares, EMPTY))

    def test_duplicated_interval(self):
        shares = dict(quarters().shares)
        shares[2] = P((F(1, 4), F(3, 4)))
        assert not check_partition(Allocation(shares, EMPTY))

    def test_leftover_counts(self):
        shares = dict(quarters().shares)
        leftover = shares.pop(4)
        shares[4] = EMPTY
        assert check_partition(Allocation(shares, leftover))


class TestCrosscheck:
    def test_thirds(self):
        densities = [StepDensity.uniform() for _ in range(4)]
        allocation = Allocation({1: P((0, F(1, 3))), 2: P((F(1, 3), F(2, 3))), 3: P((F(2, 3), 1)), 4: EMPTY}, EMPTY)
        report = check_envy_free(allocation, densities)
        assert report.matrix[0][0] == F(1, 3)
        assert numeric_crosscheck(allocation, densities, 1e-9)

    def test_corrupted_entry_is_caught(self, uniform4):
        exact = check_envy_free(quarters(), uniform4)
        matrix = [list(row) for row in exact.matrix]
        matrix[1][2] += F(1, 2)
        corrupted = EnvyReport(tuple(tuple(row) for row in matrix), exact.violations)
        assert not numeric_crosscheck(quarters(), uniform4, 1e-9, exact=corrupted)

    def test_tolerance_must_be_positive(self, uniform4):
        with pytest.raises(ValueError):
            numeric_crosscheck(quarters(), uniform4, 0)

    def test_honest_run(self, opposed_run):
        densities, allocation, _ = opposed_run
        assert numeric_crosscheck(allocation, densities)


class TestAudit:
    def test_honest_run_passes(self, opposed_run):
        densities, allocation, transcript = opposed_run
        report = audit_transcript(transcript, densities)
        assert report.ok, [str(f) for f in report.failures]
        for check in ("equal-cut", "name-r", "yz-strict", "reserve-augment", "choose-rule",
                      "shrink", "ia-certificate", "partial-envy"):
            assert report.checked[check] > 0

    def test_idempotent(self, opposed_run):
        densities, _, transcript = opposed_run
        first = audit_transcript(transcript, densities)
        second = audit_transcript(transcript, densities)
        assert first.failures == second.failures and first.checked == second.checked

    def test_settled_at_step_3(self, uniform4):
        allocation, transcript = run(uniform4)
        assert audit_transcript(transcript, uniform4).ok

    @pytest.mark.parametrize("mode", sorted(TAMPER_MODES))
    def test_tampering_is_detected(self, generic4, generic4_run, mode):
        densities, (allocation, transcript) = generic4, generic4_run
        assert audit_transcript(transcript, densities).ok
        tamper, expected = TAMPER_MODES[mode]
        report = audit_transcript(tamper(transcript, densities), densities)
        assert expected in report.failed_checks

    def test_truncated_transcript_is_incomplete(self, opposed_run):
        densities, _, transcript = opposed_run
        report = audit_transcript(Transcript(transcript.events[:-1]), densities)
        assert "complete" in report.failed_checks

    def test_unknown_kind(self, opposed_run):
        densities, _, transcript = opposed_run
        events = list(transcript.events)
        events[0] = replace(events[0], kind="teleport")
        with pytest.raises(InputError):
            audit_transcript(Transcript(events), densities)

    def test_missing_field(self, opposed_run):
        densities, _, transcript = opposed_run
        events = list(transcript.events)
        data = dict(events[0].data)
        del data["pieces"]
        events[0] = replace(events[0], data=data)
        with pytest.raises(InputError):
            audit_transcript(Transcript(events), densities)


class TestReport:
    def test_lists_every_check(self, opposed_run):
        densities, allocation, transcript = opposed_run
        result = verify_run(allocation, transcript, densities)
        assert result.ok
        text = format_report(result)
        for check in CHECKS:
            assert check in text
        assert "Result: PASS" in text

    def test_names_failures(self, opposed_run):
        densities, allocation, transcript = opposed_run
        tamper, expected = TAMPER_MODES["decrement-r"]
        result = verify_run(allocation, tamper(transcript, densities), densities)
        assert not result.ok
        assert expected in result.failed_checks
        assert "FAIL" in format_report(result)

    def test_partition_failure_is_named(self, opposed_run):
        densities, allocation, transcript = opposed_run
        shares = dict(allocation.shares)
        shares[1] = EMPTY
        result = verify_run(Allocation(shares, allocation.leftover), transcript, densities)
        assert "allocation-partition" in result.failed_checks

    def test_swapped_allocation_file_is_named(self, opposed_run):
        densities, allocation, transcript = opposed_run
        shares = dict(allocation.shares)
        shares[1], shares[2] = shares[2], shares[1]
        swapped = Allocation(shares, allocation.leftover)
        result = verify_run(swapped, transcript, densities)
        assert check_partition(swapped)
        assert not result.matches_transcript
        assert "allocation-matches-transcript" in result.failed_checks
        assert "allocation-matches-transcript" in format_report(result)

    def test_replayed_allocation_matches(self, opposed_run):
        densities, allocation, transcript = opposed_run
        assert matches_replay(allocation, transcript.replay_allocation(len(densities)))

"""Plain-text verification report."""

from dataclasses import dataclass
from typing import List

from src.geometry import format_fraction

from .audit import CHECKS, AuditReport
from .envy import EnvyReport

WIDTH = 30


@dataclass(frozen=True)
class VerificationResult:
    partition: bool
    envy: EnvyReport
    audit: AuditReport
    crosscheck: bool
    matches_transcript: bool = True

    @property
    def ok(self) -> bool:
        return (
            self.partition
            and self.matches_transcript
            and self.envy.envy_free
            and self.audit.ok
            and self.crosscheck
        )

    @property
    def failed_checks(self) -> List[str]:
        failed = []
        if not self.partition:
            failed.append("allocation-partition")
        if not self.matches_transcript:
            failed.append("allocation-matches-transcript")
        if not self.envy.envy_free:
            failed.append("envy-free")
        if not self.crosscheck:
            failed.append("numeric-crosscheck")
        return failed + self.audit.failed_checks


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def format_report(result: VerificationResult) -> str:
    lines = ["=" * 60, "VERIFICATION REPORT", "=" * 60]
    lines.append(f"{'allocation-partition':<{WIDTH}} {_status(result.partition)}")
    lines.append(f"{'allocation-matches-transcript':<{WIDTH}} {_status(result.matches_transcript)}")
    lines.append(f"{'envy-free':<{WIDTH}} {_status(result.envy.envy_free)}")
    for i, j in result.envy.violations:
        row = result.envy.matrix[i - 1]
        lines.append(f"    player {i} envies {j}: {format_fraction(row[i - 1])} > {format_fraction(row[j - 1])}")
    lines.append(f"{'numeric-crosscheck':<{WIDTH}} {_status(result.crosscheck)}")
    for check in CHECKS:
        failures = [f for f in result.audit.failures if f.check == check]
        count = result.audit.checked.get(check, 0)
        lines.append(f"{check:<{WIDTH}} {_status(not failures)} ({count} checked)")
        lines.extend(f"    {failure}" for failure in failures)
    lines.append("-" * 60)
    lines.append("Envy matrix (row = evaluating player):")
    for i, row in enumerate(result.envy.matrix, start=1):
        lines.append(f"  {i}: " + " ".join(format_fraction(v) for v in row))
    lines.append(f"Result: {_status(result.ok)}")
    return "\n".join(lines) + "\n"

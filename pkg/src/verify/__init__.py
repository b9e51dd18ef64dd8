from .envy import EnvyReport, check_envy_free, check_partition, matches_replay, numeric_crosscheck, value_matrix
from .audit import CHECKS, AuditFailure, AuditReport, audit_transcript
from .report import VerificationResult, format_report


def verify_run(allocation, transcript, densities, tolerance=None) -> VerificationResult:
    """Every outcome and transcript check in one call."""
    envy = check_envy_free(allocation, densities)
    kwargs = {} if tolerance is None else {"tolerance": tolerance}
    return VerificationResult(
        partition=check_partition(allocation),
        envy=envy,
        audit=audit_transcript(transcript, densities),
        crosscheck=numeric_crosscheck(allocation, densities, exact=envy, **kwargs),
        matches_transcript=matches_replay(allocation, transcript.replay_allocation(len(densities))),
    )

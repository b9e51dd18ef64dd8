"""Configuration settings for the chore division engine."""

from pathlib import Path

# Base paths
PROJECT_ROOT = Path(__file__).parent.parent.parent
OUTPUT_PATH = PROJECT_ROOT / "output"
LOG_DIR = PROJECT_ROOT / "logs"

# Output file names written by `run`
FILE_NAMES = {
    "instance": "instance.txt",
    "allocation": "allocation.txt",
    "transcript": "transcript.log",
    "partial_transcript": "transcript.partial.log",
    "summary": "summary.txt",
    "events": "events.parquet",
}

# Step 10 readings: "aside" = per-round shrinkage, "literal" = printed formula
S_FORMULAS = ("aside", "literal")
DEFAULT_S_FORMULA = "aside"

# Step 9 and Step 14 choosing: "required" = an augmenter must take a piece it
# augmented if one is available; "smallest" = only among its smallest pieces
CHOOSE_RULES = ("required", "smallest")

# Float oracle tolerance for numeric_crosscheck
CROSSCHECK_TOLERANCE = 1e-9

# Random instance generation
GENERATOR = {
    "breakpoint_denominator": 64,
    "max_value": 9,
    "budget": 4,
}

# Exit codes for the command line
EXIT_CODES = {
    "ok": 0,
    "verify_failed": 1,
    "input_error": 2,
    "protocol_error": 3,
}

"""Text serializations: instance, allocation and transcript files."""

import json
from pathlib import Path
from typing import Sequence

from src.geometry import format_fraction
from src.protocol.state import Allocation, Transcript
from src.utils.logger import get_logger
from src.valuation import StepDensity, evaluate

from .codec import encode_data

logger = get_logger(__name__)


def format_instance(densities: Sequence[StepDensity], label: str = "") -> str:
    lines = [f"label: {label}", f"n: {len(densities)}"]
    for i, density in enumerate(densities, start=1):
        records = "; ".join(f"{bp} {v}" for bp, v in density.to_records())
        lines.append(f"player {i}: {records}")
    return "\n".join(lines) + "\n"


def format_allocation(allocation: Allocation, densities: Sequence[StepDensity]) -> str:
    """Shares as JSON interval pairs, then each player's value of every share."""
    shares = allocation.share_list()
    lines = [f"share {i}: {json.dumps(share.to_pairs())}" for i, share in enumerate(shares, start=1)]
    lines.append(f"leftover: {json.dumps(allocation.leftover.to_pairs())}")
    for i, density in enumerate(densities, start=1):
        values = " ".join(format_fraction(evaluate(density, share)) for share in shares)
        lines.append(f"value {i}: {values}")
    return "\n".join(lines) + "\n"


def format_event(event) -> str:
    record = {
        "seq": event.seq,
        "step": event.step,
        "kind": event.kind,
        "actor": event.actor,
        "data": encode_data(event.data),
    }
    return json.dumps(record, separators=(",", ":"))


def format_transcript(transcript: Transcript) -> str:
    return "".join(format_event(event) + "\n" for event in transcript)


class TextWriter:
    """Write run artifacts under one output directory."""

    def __init__(self, output_path: Path):
        self.output_path = Path(output_path)
        self.output_path.mkdir(parents=True, exist_ok=True)

    def write(self, text: str, filename: str) -> Path:
        file_path = self.output_path / filename
        file_path.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", file_path)
        return file_path

    def write_instance(self, densities: Sequence[StepDensity], filename: str, label: str = "") -> Path:
        return self.write(format_instance(densities, label), filename)

    def write_allocation(self, allocation: Allocation, densities: Sequence[StepDensity], filename: str) -> Path:
        return self.write(format_allocation(allocation, densities), filename)

    def write_transcript(self, transcript: Transcript, filename: str) -> Path:
        path = self.write(format_transcript(transcript), filename)
        logger.info("Transcript has %d events", len(transcript))
        return path

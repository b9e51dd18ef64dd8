"""Transcript (JSON lines) reader."""

import json
from typing import List

from src.exceptions import InputError
from src.protocol.state import Event, Transcript
from src.storage.codec import decode_data

from .base import BaseReader

REQUIRED_KEYS = ("seq", "step", "kind", "actor", "data")


def parse_event(line: str, expected_seq: int) -> Event:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise InputError(f"event {expected_seq} is not valid JSON: {e}") from e
    if not isinstance(record, dict) or any(key not in record for key in REQUIRED_KEYS):
        raise InputError(f"event {expected_seq} lacks one of {REQUIRED_KEYS}")
    if record["seq"] != expected_seq:
        raise InputError(f"events out of order: expected seq {expected_seq}, got {record['seq']}")
    if not isinstance(record["data"], dict):
        raise InputError(f"event {expected_seq} data is not an object")
    return Event(record["seq"], str(record["step"]), record["kind"], record["actor"], decode_data(record["data"]))


def parse_transcript(lines: List[str]) -> Transcript:
    return Transcript([parse_event(line, seq) for seq, line in enumerate(lines)])


class TranscriptReader(BaseReader):
    def parse(self, lines: List[str]) -> Transcript:
        return parse_transcript(lines)

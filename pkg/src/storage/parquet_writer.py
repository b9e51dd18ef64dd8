"""Parquet export of transcript events for analysis."""

import json
from pathlib import Path

import pandas as pd

from src.protocol.state import Transcript
from src.utils.logger import get_logger

from .codec import encode_data

logger = get_logger(__name__)

EVENT_COLUMNS = ["seq", "step", "kind", "actor", "payload"]


def events_frame(transcript: Transcript) -> pd.DataFrame:
    """One row per event; the encoded data goes into a JSON `payload` column."""
    rows = [
        {
            "seq": event.seq,
            "step": event.step,
            "kind": event.kind,
            "actor": event.actor,
            "payload": json.dumps(encode_data(event.data), separators=(",", ":")),
        }
        for event in transcript
    ]
    df = pd.DataFrame(rows, columns=EVENT_COLUMNS)
    df["actor"] = df["actor"].astype("Int64")
    return df


class ParquetWriter:
    """Write DataFrames to Parquet files."""

    def __init__(self, output_path: Path):
        self.output_path = Path(output_path)
        self.output_path.mkdir(parents=True, exist_ok=True)

    def write(self, df: pd.DataFrame, filename: str) -> Path:
        """Write a DataFrame to a Parquet file."""
        if df.empty:
            logger.warning("Empty DataFrame, skipping write for %s", filename)
            return None

        file_path = self.output_path / filename
        df.to_parquet(file_path, index=False, engine="pyarrow")
        logger.info("Wrote %d records to %s", len(df), file_path)
        return file_path

    def write_events(self, transcript: Transcript, filename: str) -> Path:
        return self.write(events_frame(transcript), filename)

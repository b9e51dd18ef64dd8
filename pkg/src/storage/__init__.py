from .codec import decode_data, encode_data
from .parquet_writer import ParquetWriter, events_frame
from .text_writer import (
    TextWriter,
    format_allocation,
    format_event,
    format_instance,
    format_transcript,
)

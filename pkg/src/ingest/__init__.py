from .base import BaseReader
from .instance import Instance, InstanceReader
from .transcript import TranscriptReader, parse_event, parse_transcript
from .allocation import AllocationReader

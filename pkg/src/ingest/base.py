"""Base class for file readers."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List

from src.exceptions import InputError
from src.utils.logger import get_logger

logger = get_logger(__name__)


class BaseReader(ABC):
    """Abstract base class for the instance, transcript and allocation readers."""

    def __init__(self, file_path: Path):
        self.file_path = Path(file_path)

    def load_lines(self) -> List[str]:
        """Non-blank lines of the file, stripped."""
        try:
            with open(self.file_path, "r", encoding="utf-8") as f:
                return [line.strip() for line in f if line.strip()]
        except (IOError, UnicodeDecodeError) as e:
            logger.warning("Could not load %s: %s", self.file_path, e)
            raise InputError(f"cannot read {self.file_path}: {e}") from e

    def read(self) -> Any:
        """Load and parse the file."""
        lines = self.load_lines()
        try:
            return self.parse(lines)
        except InputError as e:
            logger.warning("Could not parse %s: %s", self.file_path, e)
            raise

    @abstractmethod
    def parse(self, lines: List[str]) -> Any:
        """Turn the file's lines into a domain object."""
        pass

    @staticmethod
    def split_field(line: str) -> tuple:
        """Split "key: value" into (key, value)."""
        key, sep, value = line.partition(":")
        if not sep:
            raise InputError(f"expected 'key: value', got {line!r}")
        return key.strip(), value.strip()

"""Allocation file reader."""

import json
from typing import List

from src.exceptions import InputError
from src.geometry import EMPTY, Piece
from src.protocol.state import Allocation

from .base import BaseReader


class AllocationReader(BaseReader):
    """Reads `share i:` and `leftover:` lines; `value i:` lines are informational."""

    def parse(self, lines: List[str]) -> Allocation:
        shares, leftover = {}, EMPTY
        for line in lines:
            key, value = self.split_field(line)
            if key.startswith("value "):
                continue
            piece = self._parse_piece(value, key)
            if key == "leftover":
                leftover = piece
            elif key.startswith("share "):
                try:
                    index = int(key[len("share "):])
                except ValueError as e:
                    raise InputError(f"bad share label {key!r}") from e
                shares[index] = piece
            else:
                raise InputError(f"unknown allocation field {key!r}")
        if not shares or sorted(shares) != list(range(1, len(shares) + 1)):
            raise InputError(f"expected shares 1..n, got {sorted(shares)}")
        return Allocation(shares, leftover)

    @staticmethod
    def _parse_piece(text: str, key: str) -> Piece:
        try:
            return Piece.from_pairs(json.loads(text))
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            raise InputError(f"{key} is not a list of interval pairs: {e}") from e

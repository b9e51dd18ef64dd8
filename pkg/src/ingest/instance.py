"""Instance file reader."""

from dataclasses import dataclass
from typing import List, Tuple

from src.exceptions import InputError
from src.valuation import StepDensity

from .base import BaseReader


@dataclass(frozen=True)
class Instance:
    n: int
    densities: Tuple[StepDensity, ...]
    label: str = ""


class InstanceReader(BaseReader):
    """Reads `label:`, `n:` and one `player i: bp value; bp value; ...` line per player."""

    def parse(self, lines: List[str]) -> Instance:
        label, n, players = "", None, {}
        for line in lines:
            if line.startswith("#"):
                continue
            key, value = self.split_field(line)
            if key == "label":
                label = value
            elif key == "n":
                n = self._parse_int(value, "n")
            elif key.startswith("player "):
                index = self._parse_int(key[len("player "):], "player index")
                if index in players:
                    raise InputError(f"player {index} is listed twice")
                players[index] = self._parse_density(value)
            else:
                raise InputError(f"unknown instance field {key!r}")

        if n is None:
            raise InputError("instance has no 'n:' line")
        if n < 4:
            raise InputError(f"instances need n >= 4, got {n}")
        if sorted(players) != list(range(1, n + 1)):
            raise InputError(f"expected players 1..{n}, got {sorted(players)}")
        return Instance(n, tuple(players[i] for i in range(1, n + 1)), label)

    @staticmethod
    def _parse_int(text: str, what: str) -> int:
        try:
            return int(text)
        except ValueError as e:
            raise InputError(f"{what} is not an integer: {text!r}") from e

    @staticmethod
    def _parse_density(text: str) -> StepDensity:
        records = []
        for chunk in text.split(";"):
            parts = chunk.split()
            if len(parts) != 2:
                raise InputError(f"expected 'breakpoint value', got {chunk.strip()!r}")
            records.append(parts)
        return StepDensity.from_records(records)

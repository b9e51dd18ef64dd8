"""Field codecs for transcript events.

Every event field has a fixed type; values are written as JSON with
Fractions as "p/q" strings and pieces as [["lo", "hi"], ...] lists.
"""

from typing import Any, Callable, Dict, Tuple

from src.exceptions import InputError
from src.geometry import Piece, format_fraction, parse_fraction


def _piece_out(piece: Piece) -> list:
    return piece.to_pairs()


def _piece_in(raw) -> Piece:
    return Piece.from_pairs(raw)


def _identity(value):
    return value


def _many(fn: Callable) -> Callable:
    return lambda values: [fn(v) for v in values]


Codec = Tuple[Callable[[Any], Any], Callable[[Any], Any]]

FRACTION: Codec = (format_fraction, parse_fraction)
PIECE: Codec = (_piece_out, _piece_in)
PIECES: Codec = (_many(_piece_out), _many(_piece_in))
PLAIN: Codec = (_identity, _identity)

FIELD_CODECS: Dict[str, Codec] = {
    # fractions
    "own": FRACTION,
    "rest": FRACTION,
    "other": FRACTION,
    "value": FRACTION,
    "leftover_value": FRACTION,
    "epsilon": FRACTION,
    "shrink": FRACTION,
    # single pieces
    "source": PIECE,
    "larger_piece": PIECE,
    "smaller_piece": PIECE,
    "own_piece": PIECE,
    "other_piece": PIECE,
    "leftover": PIECE,
    "leftover_before": PIECE,
    "leftover_after": PIECE,
    # piece lists
    "pieces": PIECES,
    "pool": PIECES,
    "members": PIECES,
    "before": PIECES,
    "lots": PIECES,
    "added": PIECES,
    "after": PIECES,
    "ys": PIECES,
    "zs": PIECES,
    "offered": PIECES,
    "grants": PIECES,
    "chosen": PIECES,
}

# Integers, strings and lists of them pass through JSON unchanged.
PLAIN_FIELDS = {
    "count", "cut_ref", "larger", "smaller", "k", "r", "s", "objector", "divider",
    "index", "ways", "taken", "targets", "polled", "yes", "receivers", "agree",
    "pair", "purpose", "question", "label", "case", "formula", "phase", "labels",
    "augmented_by", "picks", "blocks", "order", "rule", "rejected",
}


def _codec(name: str) -> Codec:
    if name in FIELD_CODECS:
        return FIELD_CODECS[name]
    if name in PLAIN_FIELDS:
        return PLAIN
    raise InputError(f"unknown transcript field {name!r}")


def encode_data(data: Dict[str, Any]) -> Dict[str, Any]:
    return {name: _codec(name)[0](value) for name, value in data.items()}


def decode_data(data: Dict[str, Any]) -> Dict[str, Any]:
    try:
        return {name: _codec(name)[1](value) for name, value in data.items()}
    except (TypeError, ValueError) as e:
        raise InputError(f"malformed transcript field: {e}") from e

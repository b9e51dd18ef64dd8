from .piece import (
    CAKE,
    EMPTY,
    ONE,
    ZERO,
    Interval,
    Piece,
    are_disjoint,
    as_fraction,
    canonicalize,
    difference,
    equals,
    format_fraction,
    intersection,
    is_subset,
    parse_fraction,
    union,
    union_all,
)

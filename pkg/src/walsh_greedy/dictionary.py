"""Fixed enumeration of rational a-adic step functions.

Elements are ranked diagonally over (level J, denominator bound D), t = J + D
ascending and J ascending within t. R_D is the set of values p/q with |p| <= D
and 1 <= q <= D, ordered as R_{D-1} followed by the newly admitted values in
ascending order (R_0 = [0]). Block (J, D) holds every value vector of length
a^J over R_D that uses at least one value outside R_{D-1}, so each
(level, vector) pair is enumerated exactly once.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Tuple

import numpy as np

from .adic import StepFunction
from .config import check_level
from .errors import InvalidParameterError


@lru_cache(maxsize=None)
def rational_values(bound: int) -> Tuple[Fraction, ...]:
    """The ordered value set R_D."""
    if bound < 0:
        raise InvalidParameterError(f"denominator bound must be >= 0, got {bound}")
    if bound == 0:
        return (Fraction(0),)
    previous = rational_values(bound - 1)
    seen = set(previous)
    fresh = {Fraction(p, q) for q in range(1, bound + 1) for p in range(-bound, bound + 1)} - seen
    return previous + tuple(sorted(fresh))


def _block_size(order: int, level: int, bound: int) -> int:
    length = order**level
    old = len(rational_values(bound - 1)) if bound else 0
    return len(rational_values(bound)) ** length - old**length


def _blocks(order: int) -> Iterator[Tuple[int, int]]:
    diagonal = 0
    while True:
        for level in range(diagonal + 1):
            yield level, diagonal - level
        diagonal += 1


def _unrank(order: int, level: int, bound: int, rank: int) -> Tuple[Fraction, ...]:
    values = rational_values(bound)
    length = order**level
    if bound == 0:
        return (Fraction(0),) * length
    old = len(rational_values(bound - 1))
    full = len(values)
    new = full - old
    for first_new in range(length):
        rest = length - first_new - 1
        group = old**first_new * new * full**rest
        if rank >= group:
            rank -= group
            continue
        suffix_rank, rank = rank % full**rest, rank // full**rest
        choice, prefix_rank = rank % new, rank // new
        prefix = [values[d] for d in _digits(prefix_rank, old, first_new)]
        suffix = [values[d] for d in _digits(suffix_rank, full, rest)]
        return tuple(prefix + [values[old + choice]] + suffix)
    raise AssertionError("rank outside block")


def _digits(value: int, base: int, width: int) -> list[int]:
    out = [0] * width
    for position in range(width - 1, -1, -1):
        value, out[position] = divmod(value, base)
    return out


def dictionary_entry(index: int, order: int = 2) -> Tuple[int, Tuple[Fraction, ...]]:
    """(level, exact value vector) of the index-th dictionary element (1-based)."""
    if index < 1:
        raise InvalidParameterError(f"dictionary index must be >= 1, got {index}")
    rank = index - 1
    for level, bound in _blocks(order):
        size = _block_size(order, level, bound)
        if rank < size:
            return level, _unrank(order, level, bound, rank)
        rank -= size
    raise AssertionError("unreachable")


def dictionary_step(index: int, order: int = 2, *, max_level: Optional[int] = None) -> StepFunction:
    """The index-th rational step function of the fixed enumeration."""
    level, values = dictionary_entry(index, order)
    check_level(order, level, max_level, f"dictionary element {index}")
    return StepFunction(order, level, np.array([float(v) for v in values], dtype=np.complex128))

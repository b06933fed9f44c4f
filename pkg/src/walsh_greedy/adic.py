"""Exact a-adic intervals, step functions and cell sets.

Every object built by the library is a step function constant on the cells
Δ_J^{(j+1)} = [j/a^J, (j+1)/a^J) of a level-J grid. Values are stored as a
complex numpy vector of length a^J in natural cell order; measures are kept as
exact fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from .config import check_level
from .errors import InvalidParameterError, ResolutionError

Scalar = Union[int, float, complex]
NormOrder = Union[int, float, str]


def _check_order(order: int) -> None:
    if order < 2:
        raise InvalidParameterError(f"order must be >= 2, got {order}")


@dataclass(frozen=True)
class AdicInterval:
    """Δ_m^{(k)} = [(k-1)/a^m, k/a^m), 1 <= k <= a^m."""

    order: int
    level: int
    index: int

    def __post_init__(self) -> None:
        _check_order(self.order)
        if self.level < 0:
            raise InvalidParameterError(f"interval level must be >= 0, got {self.level}")
        if not 1 <= self.index <= self.order**self.level:
            raise InvalidParameterError(
                f"interval index must lie in [1, {self.order**self.level}], got {self.index}"
            )

    @classmethod
    def from_cell(cls, order: int, level: int, cell: int) -> "AdicInterval":
        """Interval of the zero-based `cell` on the level grid."""
        return cls(order, level, cell + 1)

    @property
    def measure(self) -> Fraction:
        return Fraction(1, self.order**self.level)

    @property
    def left(self) -> Fraction:
        return Fraction(self.index - 1, self.order**self.level)

    @property
    def right(self) -> Fraction:
        return Fraction(self.index, self.order**self.level)

    def contains(self, x: Fraction) -> bool:
        return self.left <= x < self.right

    def cells(self, level: int) -> range:
        """Zero-based cells of the level grid lying inside the interval."""
        if level < self.level:
            raise ResolutionError(
                f"level {level} is coarser than interval level {self.level}",
                required_level=self.level,
            )
        width = self.order ** (level - self.level)
        return range((self.index - 1) * width, self.index * width)

    def children(self) -> Tuple["AdicInterval", ...]:
        base = (self.index - 1) * self.order
        return tuple(AdicInterval(self.order, self.level + 1, base + r + 1) for r in range(self.order))

    def parent(self) -> "AdicInterval":
        if self.level == 0:
            raise InvalidParameterError("[0, 1) has no parent interval")
        return AdicInterval(self.order, self.level - 1, (self.index - 1) // self.order + 1)

    def __str__(self) -> str:
        return f"{self.level}:{self.index}"


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A function constant on every cell of the level-J grid of order a."""

    order: int
    level: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_order(self.order)
        if self.level < 0:
            raise InvalidParameterError(f"level must be >= 0, got {self.level}")
        values = np.array(self.values, dtype=np.complex128).reshape(-1)
        if values.size != self.order**self.level:
            raise InvalidParameterError(
                f"expected {self.order**self.level} values for order {self.order} level {self.level}, "
                f"got {values.size}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, order: int, level: int) -> "StepFunction":
        return cls(order, level, np.zeros(order**level, dtype=np.complex128))

    @classmethod
    def constant(cls, order: int, level: int, value: Scalar) -> "StepFunction":
        return cls(order, level, np.full(order**level, value, dtype=np.complex128))

    @property
    def size(self) -> int:
        return self.values.size

    def refine(self, level: int) -> "StepFunction":
        """Exact refinement: each cell splits into a^(level-J) cells with copied value."""
        if level < self.level:
            raise ResolutionError(
                f"cannot refine level {self.level} down to {level}", required_level=self.level
            )
        if level == self.level:
            return self
        return StepFunction(self.order, level, np.repeat(self.values, self.order ** (level - self.level)))

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def _binary(self, other: Union["StepFunction", Scalar], op: Callable) -> "StepFunction":
        if isinstance(other, StepFunction):
            left, right, level = reconcile(self, other)
            return StepFunction(self.order, level, op(left, right))
        return StepFunction(self.order, self.level, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.order, self.level, -self.values)

    def __repr__(self) -> str:
        return f"StepFunction(order={self.order}, level={self.level}, size={self.size})"


def reconcile(f: StepFunction, g: StepFunction) -> Tuple[np.ndarray, np.ndarray, int]:
    """Bring two step functions of equal order to their common finer level."""
    if f.order != g.order:
        raise InvalidParameterError(f"order mismatch: {f.order} != {g.order}")
    level = max(f.level, g.level)
    return f.refine(level).values, g.refine(level).values, level


@dataclass(frozen=True, eq=False)
class CellSet:
    """A finite union of level-J cells, stored as sorted zero-based indices."""

    order: int
    level: int
    members: np.ndarray

    def __post_init__(self) -> None:
        _check_order(self.order)
        members = np.unique(np.asarray(self.members, dtype=np.int64).reshape(-1))
        if members.size and (members[0] < 0 or members[-1] >= self.order**self.level):
            raise InvalidParameterError(
                f"cell indices must lie in [0, {self.order**self.level}) at level {self.level}"
            )
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @classmethod
    def from_mask(cls, order: int, level: int, mask: np.ndarray) -> "CellSet":
        return cls(order, level, np.flatnonzero(np.asarray(mask, dtype=bool)))

    @classmethod
    def empty(cls, order: int, level: int = 0) -> "CellSet":
        return cls(order, level, np.empty(0, dtype=np.int64))

    @classmethod
    def full(cls, order: int, level: int = 0) -> "CellSet":
        return cls(order, level, np.arange(order**level, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.members.size)

    @property
    def measure(self) -> Fraction:
        return Fraction(self.size, self.order**self.level)

    def mask(self, level: Optional[int] = None) -> np.ndarray:
        level = self.level if level is None else level
        if level < self.level:
            raise ResolutionError(
                f"cannot view a level-{self.level} cell set at level {level}", required_level=self.level
            )
        width = self.order ** (level - self.level)
        out = np.zeros(self.order**level, dtype=bool)
        if self.size:
            out.reshape(-1, width)[self.members] = True
        return out

    def refine(self, level: int) -> "CellSet":
        return CellSet.from_mask(self.order, level, self.mask(level))

    def _combine(self, other: "CellSet", op: Callable) -> "CellSet":
        if self.order != other.order:
            raise InvalidParameterError(f"order mismatch: {self.order} != {other.order}")
        level = max(self.level, other.level)
        return CellSet.from_mask(self.order, level, op(self.mask(level), other.mask(level)))

    def union(self, other: "CellSet") -> "CellSet":
        return self._combine(other, np.logical_or)

    def intersection(self, other: "CellSet") -> "CellSet":
        return self._combine(other, np.logical_and)

    def complement(self) -> "CellSet":
        return CellSet.from_mask(self.order, self.level, ~self.mask())

    def __repr__(self) -> str:
        return f"CellSet(order={self.order}, level={self.level}, size={self.size}, measure={self.measure})"


def indicator(interval: AdicInterval, level: int, *, max_level: Optional[int] = None) -> StepFunction:
    """χ_Δ sampled on the level-J grid."""
    if level < interval.level:
        raise ResolutionError(
            f"indicator of a level-{interval.level} interval needs level >= {interval.level}, got {level}",
            required_level=interval.level,
        )
    check_level(interval.order, level, max_level, "indicator")
    values = np.zeros(interval.order**level, dtype=np.complex128)
    cells = interval.cells(level)
    values[cells.start : cells.stop] = 1.0
    return StepFunction(interval.order, level, values)


def menshov_kernel(interval: AdicInterval, level: int, *, max_level: Optional[int] = None) -> StepFunction:
    """I_m^{(k)}: 1 off Δ and 1 - a^m on Δ, i.e. ψ_0 - a^m·χ_Δ."""
    chi = indicator(interval, level, max_level=max_level)
    return StepFunction(interval.order, level, 1.0 - float(interval.order**interval.level) * chi.values)


def dilate(f: StepFunction, s: int, *, max_level: Optional[int] = None) -> StepFunction:
    """x ↦ f(a^s·x mod 1), an exact tiling at level J + s."""
    if s < 0:
        raise InvalidParameterError(f"dilation exponent must be >= 0, got {s}")
    check_level(f.order, f.level + s, max_level, "dilation")
    if s == 0:
        return f
    return StepFunction(f.order, f.level + s, np.tile(f.values, f.order**s))


def _norm_order(p: NormOrder) -> float:
    if isinstance(p, str):
        if p.lower() in {"inf", "infinity", "max"}:
            return float("inf")
        p = float(p)
    if p not in (1, 2, float("inf")):
        raise InvalidParameterError(f"p must be 1, 2 or inf, got {p}")
    return float(p)


def norm(f: StepFunction, p: NormOrder = 1) -> float:
    """Riemann-sum L^p norm of a step function.

    Sums are correctly rounded (fsum), so refining or dilating by powers of
    two leaves the result bit-identical. For other orders the division by
    a^J can still move the last ulp.
    """
    order = _norm_order(p)
    magnitudes = np.abs(f.values)
    if order == float("inf"):
        return float(magnitudes.max(initial=0.0))
    if order == 1:
        return math.fsum(magnitudes.tolist()) / f.size
    return math.sqrt(math.fsum((magnitudes**2).tolist()) / f.size)


def disagreement_measure(f: StepFunction, g: StepFunction, tol: float = 1e-12) -> Tuple[Fraction, CellSet]:
    """Exact measure of the cells where |f - g| > tol, with the cell set."""
    left, right, level = reconcile(f, g)
    cells = CellSet.from_mask(f.order, level, np.abs(left - right) > tol)
    return cells.measure, cells


def project(samples: Iterable[Scalar], order: int, level: int) -> StepFunction:
    """Cell averages of uniformly spaced samples onto the level-J grid.

    The sample count must be a positive multiple of a^J; consecutive groups
    of samples are averaged.
    """
    data = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=np.complex128)
    cells = order**level
    if data.size == 0 or data.size % cells:
        raise InvalidParameterError(f"{data.size} samples cannot be averaged onto {cells} cells")
    return StepFunction(order, level, data.reshape(cells, -1).mean(axis=1))


def sample_function(
    func: Callable[[np.ndarray], np.ndarray],
    order: int,
    level: int,
    *,
    oversample: int = 1,
    max_level: Optional[int] = None,
) -> StepFunction:
    """Project `func` at level J by midpoint sampling `oversample` points per cell."""
    check_level(order, level, max_level, "projection")
    count = order**level * oversample
    midpoints = (np.arange(count) + 0.5) / count
    return project(np.asarray(func(midpoints), dtype=np.complex128), order, level)

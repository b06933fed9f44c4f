"""Rademacher and generalized Walsh (Chrestenson) functions of order a.

Conventions:
  * a point x in [0,1) has a-adic digits ξ_1, ξ_2, ...; cell c of the level-J
    grid has digits ξ_1..ξ_J with ξ_1 the most significant digit of c;
  * a spectral index n = Σ_j β_j a^j has base-a digits β_0, β_1, ...;
  * ψ_n(x) = ω_a^(Σ_j β_j·ξ_{j+1} mod a), so β_j pairs with ξ_{j+1}.

Phases are always carried as integer exponents mod a and turned into complex
numbers through a single a-entry table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .adic import StepFunction
from .config import check_level
from .errors import InvalidParameterError, PrecisionError, ResolutionError

Point = Union[Fraction, int, float, str, Sequence[int]]
Method = Literal["naive", "fast"]

NAIVE_MAX_LEVEL = 8
NAIVE_MAX_CELLS = 4096


@lru_cache(maxsize=None)
def phase_table(order: int) -> np.ndarray:
    """ω_a^k for k = 0..a-1, exact where the value is a Gaussian integer."""
    if order < 2:
        raise InvalidParameterError(f"order must be >= 2, got {order}")
    table = np.exp(2j * np.pi * np.arange(order) / order)
    table[0] = 1.0
    if order % 2 == 0:
        table[order // 2] = -1.0
    if order % 4 == 0:
        table[order // 4] = 1j
        table[3 * order // 4] = -1j
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class UnitPhase:
    """ω_a^exponent with the exponent reduced mod a."""

    order: int
    exponent: int

    def __post_init__(self) -> None:
        if self.order < 2:
            raise InvalidParameterError(f"order must be >= 2, got {self.order}")
        object.__setattr__(self, "exponent", self.exponent % self.order)

    @property
    def value(self) -> complex:
        return complex(phase_table(self.order)[self.exponent])

    def conjugate(self) -> "UnitPhase":
        return UnitPhase(self.order, -self.exponent)

    def __mul__(self, other: "UnitPhase") -> "UnitPhase":
        if other.order != self.order:
            raise InvalidParameterError(f"order mismatch: {self.order} != {other.order}")
        return UnitPhase(self.order, self.exponent + other.exponent)

    def __pow__(self, power: int) -> "UnitPhase":
        return UnitPhase(self.order, self.exponent * power)

    def __complex__(self) -> complex:
        return self.value


def root_of_unity_sum(order: int, m: int) -> complex:
    """Σ_{k<a} ω_a^(k·m): a when m ≡ 0 mod a, else 0."""
    table = phase_table(order)
    return complex(table[(np.arange(order) * m) % order].sum())


def _has_finite_expansion(denominator: int, order: int) -> bool:
    """True when the denominator divides some power of the order."""
    while denominator > 1:
        common = math.gcd(denominator, order)
        if common == 1:
            return False
        denominator //= common
    return True


def _as_fraction(x: Union[Fraction, int, float, str], order: int) -> Fraction:
    if isinstance(x, float) and not math.isfinite(x):
        raise PrecisionError(f"point {x!r} is not finite")
    try:
        value = Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise PrecisionError(f"cannot read {x!r} as an exact point") from exc
    value -= math.floor(value)
    if not _has_finite_expansion(value.denominator, order):
        raise PrecisionError(f"point {x!r} has no finite base-{order} expansion; pass it as a digit string")
    return value


def point_digit(x: Point, position: int, order: int) -> int:
    """ξ_position of x (1-based), after reducing x mod 1."""
    if position < 1:
        raise InvalidParameterError(f"digit position must be >= 1, got {position}")
    if isinstance(x, (list, tuple, np.ndarray)):
        digits = [int(d) for d in x]
        if any(not 0 <= d < order for d in digits):
            raise PrecisionError(f"digit string {digits} has digits outside [0, {order})")
        return digits[position - 1] if position <= len(digits) else 0
    value = _as_fraction(x, order)  # type: ignore[arg-type]
    return math.floor(value * order**position) % order


def index_digits(n: int, order: int) -> list[int]:
    """β_0, β_1, ... of n in base a (empty for n = 0)."""
    if n < 0:
        raise InvalidParameterError(f"spectral index must be >= 0, got {n}")
    digits = []
    while n:
        n, digit = divmod(n, order)
        digits.append(digit)
    return digits


def rademacher_eval(n: int, x: Point, order: int = 2) -> UnitPhase:
    """φ_n(x) = ω_a^(ξ_{n+1})."""
    if n < 0:
        raise InvalidParameterError(f"Rademacher index must be >= 0, got {n}")
    return UnitPhase(order, point_digit(x, n + 1, order))


def walsh_eval(n: int, x: Point, order: int = 2) -> UnitPhase:
    """ψ_n(x) as a product of Rademacher powers, reduced mod a."""
    exponent = sum(beta * point_digit(x, j + 1, order) for j, beta in enumerate(index_digits(n, order)) if beta)
    return UnitPhase(order, exponent)


@lru_cache(maxsize=4)
def cell_digits(order: int, level: int) -> np.ndarray:
    """Row t holds ξ_{t+1} of every level-J cell."""
    cells = np.arange(order**level, dtype=np.int64)
    rows = [(cells // order ** (level - 1 - t)) % order for t in range(level)]
    out = np.array(rows, dtype=np.int16).reshape(level, order**level)
    out.setflags(write=False)
    return out


def walsh_exponents(order: int, level: int, n: int) -> np.ndarray:
    """Integer exponents of ψ_n on the level-J grid."""
    if n >= order**level:
        raise ResolutionError(
            f"index {n} does not fit level {level} (needs n < {order**level})",
            required_level=len(index_digits(n, order)),
        )
    grid = cell_digits(order, level)
    exponents = np.zeros(order**level, dtype=np.int64)
    for j, beta in enumerate(index_digits(n, order)):
        if beta:
            exponents += beta * grid[j].astype(np.int64)
    return exponents % order


def walsh_grid(order: int, level: int, n: int) -> np.ndarray:
    """ψ_n on every level-J cell."""
    return phase_table(order)[walsh_exponents(order, level, n)]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier–Walsh coefficients c_n indexed by n < a^J; absent indices are zero."""

    order: int
    source_level: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        values = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if indices.size != values.size:
            raise InvalidParameterError("indices and values differ in length")
        ranking = np.argsort(indices, kind="stable")
        indices, values = indices[ranking], values[ranking]
        if indices.size:
            if np.any(np.diff(indices) == 0):
                raise InvalidParameterError("duplicate spectral index")
            if indices[0] < 0 or indices[-1] >= self.order**self.source_level:
                raise ResolutionError(
                    f"spectral indices must lie in [0, {self.order**self.source_level})",
                    required_level=len(index_digits(int(indices[-1]), self.order)),
                )
        indices.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, order: int, level: int, dense: np.ndarray) -> "Spectrum":
        dense = np.asarray(dense, dtype=np.complex128).reshape(-1)
        keep = np.flatnonzero(dense != 0)
        return cls(order, level, keep, dense[keep])

    @classmethod
    def from_mapping(cls, order: int, level: int, mapping: Mapping[int, complex]) -> "Spectrum":
        keys = sorted(mapping)
        return cls(order, level, np.array(keys, dtype=np.int64), np.array([mapping[k] for k in keys]))

    def __len__(self) -> int:
        return int(self.indices.size)

    def get(self, n: int) -> complex:
        position = np.searchsorted(self.indices, n)
        if position < self.indices.size and self.indices[position] == n:
            return complex(self.values[position])
        return 0j

    def items(self) -> Iterator[Tuple[int, complex]]:
        for n, c in zip(self.indices.tolist(), self.values.tolist()):
            yield int(n), complex(c)

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.items())

    def dense(self, level: Optional[int] = None) -> np.ndarray:
        level = self.source_level if level is None else level
        if self.indices.size and self.indices[-1] >= self.order**level:
            raise ResolutionError(
                f"spectrum has index {int(self.indices[-1])} which does not fit level {level}",
                required_level=len(index_digits(int(self.indices[-1]), self.order)),
            )
        out = np.zeros(self.order**level, dtype=np.complex128)
        out[self.indices] = self.values
        return out

    def support(self, threshold: float = 0.0) -> "Spectrum":
        keep = np.abs(self.values) > threshold
        return Spectrum(self.order, self.source_level, self.indices[keep], self.values[keep])

    def restrict(self, indices: Iterable[int]) -> "Spectrum":
        wanted = np.isin(self.indices, np.fromiter(indices, dtype=np.int64))
        return Spectrum(self.order, self.source_level, self.indices[wanted], self.values[wanted])


def _stage_matrix(order: int, sign: int) -> np.ndarray:
    digits = np.arange(order)
    return phase_table(order)[(sign * np.outer(digits, digits)) % order]


def _butterfly_stage(work: np.ndarray, kernel: np.ndarray, order: int, stage: int) -> np.ndarray:
    """One a-point butterfly along the digit of weight a^(J-1-stage)."""
    view = work.reshape(order**stage, order, -1)
    out = np.empty_like(view)
    for row in range(order):
        acc = view[:, 0, :] * kernel[row, 0]
        for col in range(1, order):
            acc = acc + view[:, col, :] * kernel[row, col]
        out[:, row, :] = acc
    return out.reshape(-1)


def _fast_analyze(values: np.ndarray, order: int, level: int) -> np.ndarray:
    if level == 0:
        return values.copy()
    kernel = _stage_matrix(order, -1)
    work = values.astype(np.complex128, copy=True)
    for stage in range(level):
        work = _butterfly_stage(work, kernel, order, stage)
    work = work.reshape((order,) * level).transpose(tuple(reversed(range(level))))
    return np.ascontiguousarray(work).reshape(-1) / order**level


def _fast_synthesize(dense: np.ndarray, order: int, level: int) -> np.ndarray:
    if level == 0:
        return dense.copy()
    kernel = _stage_matrix(order, 1)
    work = np.ascontiguousarray(dense.reshape((order,) * level).transpose(tuple(reversed(range(level)))))
    work = work.reshape(-1)
    for stage in range(level):
        work = _butterfly_stage(work, kernel, order, stage)
    return work


def _naive_analyze(values: np.ndarray, order: int, level: int, chunk: int = 256) -> np.ndarray:
    cells = order**level
    grid = cell_digits(order, level)
    table = phase_table(order)
    index_grid = np.array(
        [(np.arange(cells) // order**j) % order for j in range(level)], dtype=np.int64
    ).reshape(level, cells)
    out = np.empty(cells, dtype=np.complex128)
    for start in range(0, cells, chunk):
        rows = slice(start, min(start + chunk, cells))
        exponents = (index_grid[:, rows].T @ grid) % order
        out[rows] = (np.conj(table[exponents]) * values).sum(axis=1) / cells
    return out


def analyze(
    f: StepFunction,
    method: Method = "fast",
    *,
    naive_max_cells: int = NAIVE_MAX_CELLS,
) -> Spectrum:
    """c_n = a^-J Σ_cells f(cell)·conj(ψ_n(cell)) for every n < a^J."""
    if method == "fast":
        dense = _fast_analyze(f.values, f.order, f.level)
    elif method == "naive":
        if f.level > NAIVE_MAX_LEVEL or f.size > naive_max_cells:
            raise ResolutionError(
                f"naive analysis is limited to level {NAIVE_MAX_LEVEL} and {naive_max_cells} cells, "
                f"got level {f.level} ({f.size} cells)",
                required_level=f.level,
            )
        dense = _naive_analyze(f.values, f.order, f.level)
    else:
        raise InvalidParameterError(f"unknown transform method {method!r}")
    return Spectrum.from_dense(f.order, f.level, dense)


def synthesize(spectrum: Spectrum, level: Optional[int] = None, *, max_level: Optional[int] = None) -> StepFunction:
    """Σ c_n ψ_n evaluated on every level-J cell (unweighted inverse of analyze)."""
    level = spectrum.source_level if level is None else level
    check_level(spectrum.order, level, max_level, "synthesis")
    dense = spectrum.dense(level)
    return StepFunction(spectrum.order, level, _fast_synthesize(dense, spectrum.order, level))


def evaluate_terms(order: int, level: int, terms: Iterable[Tuple[int, complex]]) -> StepFunction:
    """Direct cellwise sum of c·ψ_n, independent of the fast transform."""
    total = np.zeros(order**level, dtype=np.complex128)
    for n, c in terms:
        total += c * walsh_grid(order, level, n)
    return StepFunction(order, level, total)

"""Greedy (thresholding) approximants G_m over Fourier–Walsh spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .adic import NormOrder, StepFunction, norm
from .chrestenson import Spectrum, analyze, synthesize, walsh_grid
from .errors import InvalidParameterError

DEFAULT_ZERO_THRESHOLD = 1e-14


@dataclass(frozen=True)
class GreedyOrdering:
    """Support indices by decreasing |c_n|, ties by ascending n."""

    ranked: Tuple[int, ...]
    magnitudes: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.ranked)


@dataclass(frozen=True)
class CurvePoint:
    m: int
    error: float
    partial_sum_norm_1: float


def greedy_order(spectrum: Spectrum, *, zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> GreedyOrdering:
    support = spectrum.support(zero_threshold)
    magnitudes = np.abs(support.values)
    ranking = np.lexsort((support.indices, -magnitudes))
    return GreedyOrdering(
        ranked=tuple(int(n) for n in support.indices[ranking]),
        magnitudes=tuple(float(x) for x in magnitudes[ranking]),
    )


def greedy_approximant(
    spectrum: Spectrum,
    m: int,
    level: Optional[int] = None,
    *,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
) -> StepFunction:
    """G_m: synthesis of the m largest-magnitude terms."""
    if m < 0:
        raise InvalidParameterError(f"m must be >= 0, got {m}")
    chosen = greedy_order(spectrum, zero_threshold=zero_threshold).ranked[:m]
    return synthesize(spectrum.restrict(chosen), level)


def greedy_error_curve(
    f: StepFunction,
    m_max: int,
    p: NormOrder = 1,
    *,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
) -> List[CurvePoint]:
    """(m, ‖G_m(f) - f‖_p, ‖G_m(f)‖_1) for m = 0 .. min(m_max, |support|)."""
    spectrum = analyze(f)
    ordering = greedy_order(spectrum, zero_threshold=zero_threshold)
    approximant = np.zeros(f.size, dtype=np.complex128)
    curve: List[CurvePoint] = []
    last = min(m_max, len(ordering))
    for m in range(last + 1):
        current = StepFunction(f.order, f.level, approximant)
        curve.append(CurvePoint(m, norm(current - f, p), norm(current, 1)))
        if m < last:
            n = ordering.ranked[m]
            approximant = approximant + spectrum.get(n) * walsh_grid(f.order, f.level, n)
    return curve


def prefix_norms(
    terms: Iterable[Tuple[int, complex]],
    order: int,
    level: int,
    *,
    chunk_cells: int = 1 << 21,
) -> np.ndarray:
    """L¹ norms of every natural prefix sum Σ_{k<=K} c_k ψ_{n_k}, terms taken in the given order."""
    items: Sequence[Tuple[int, complex]] = list(terms)
    cells = order**level
    norms = np.empty(len(items), dtype=np.float64)
    running = np.zeros(cells, dtype=np.complex128)
    step = max(1, chunk_cells // max(cells, 1))
    for start in range(0, len(items), step):
        block = items[start : start + step]
        rows = np.array([c * walsh_grid(order, level, n) for n, c in block], dtype=np.complex128)
        partial = np.cumsum(rows, axis=0) + running
        norms[start : start + len(block)] = np.abs(partial).mean(axis=1)
        running = partial[-1]
    return norms

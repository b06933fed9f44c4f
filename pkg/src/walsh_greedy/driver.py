"""Iterated correction: emit one monotone series whose sum agrees with f off a small set.

Each step q corrects the current residual r_q with `lemma2_construct` under
the budget ϵ·profile.factor(q), chaining its index range after the previous
step and capping its magnitudes by the smallest magnitude emitted so far.
With φ_q the step approximation of step q,

    g = f + Σ_q (P_q - φ_q),    r_{q+1} = r_q - φ_q,

so g = Σ_q P_q + r_final and g = f on E = ∩ E_q.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .adic import CellSet, StepFunction, disagreement_measure, norm
from .certificates import Certificate, Conclusion, check, within
from .chrestenson import analyze
from .config import BudgetProfile
from .dictionary import dictionary_step
from .errors import InfeasibleError, InvalidParameterError, ResolutionError
from .greedy import greedy_approximant, prefix_norms
from .lemmas import DEFAULT_EQ_TOL, MAGNITUDE_RTOL, Lemma2Result, WalshPolynomial, lemma2_construct

logger = logging.getLogger(__name__)

Mode = Literal["direct", "strict"]
StopReason = Literal["converged", "q_max", "resolution", "search_exhausted"]


@dataclass(frozen=True)
class StepRecord:
    """One iteration of the driver."""

    q: int
    budget: float
    target_distance: float
    residual_l1: float
    block_range: Tuple[int, int]
    block_magnitude: float
    min_magnitude: float
    terms: int
    dictionary_index: Optional[int] = None
    partial_sum_sup_l1: Optional[float] = None


@dataclass(frozen=True, eq=False)
class CorrectionResult:
    f: StepFunction
    g: StepFunction
    kept_set: CellSet
    series: WalshPolynomial
    trace: Tuple[StepRecord, ...]
    eps: float
    tol: float
    q_max: int
    n0: int
    profile: BudgetProfile
    mode: Mode
    stop_reason: StopReason
    certificate: Optional[Certificate] = None
    steps: Tuple[Lemma2Result, ...] = ()

    @property
    def order(self) -> int:
        return self.f.order

    @property
    def level(self) -> int:
        return self.g.level


def _pick_dictionary_element(
    residual: StepFunction, depth: int, *, max_level: Optional[int]
) -> Tuple[StepFunction, int, float]:
    """Dictionary element in 1..depth closest to the residual in L1, making progress."""
    current = norm(residual, 1)
    best: Optional[Tuple[float, int, StepFunction]] = None
    for index in range(1, depth + 1):
        try:
            candidate = dictionary_step(index, residual.order, max_level=max_level)
        except ResolutionError:
            continue
        if not np.any(candidate.values):
            continue
        distance = norm(residual - candidate, 1)
        if distance < current and (best is None or distance < best[0]):
            best = (distance, index, candidate)
    if best is None:
        raise InfeasibleError(
            f"no dictionary element among the first {depth} reduces the residual",
            achieved_residual=current,
        )
    distance, index, candidate = best
    return candidate, index, distance


def correction_conclusions(
    f: StepFunction,
    g: StepFunction,
    kept_set: CellSet,
    series: WalshPolynomial,
    series_values: StepFunction,
    step_ranges: Sequence[Tuple[int, int]],
    *,
    eps: float,
    tol: float,
    profile: BudgetProfile,
    eq_tol: float = DEFAULT_EQ_TOL,
    prefix: Optional[np.ndarray] = None,
) -> List[Conclusion]:
    """Claims about a corrected function; `series_values` is the synthesized series."""
    level = max(f.level, g.level, kept_set.level, series_values.level)
    f_l, g_l = f.refine(level), g.refine(level)
    kept = kept_set.mask(level)
    norm_f, norm_g = norm(f, 1), norm(g, 1)
    scale = eq_tol * max(1.0, float(np.max(np.abs(f.values))))
    measure, _ = disagreement_measure(f_l, g_l, scale)
    magnitudes = series.magnitudes
    top = float(magnitudes.max(initial=0.0))
    if prefix is None:
        prefix = prefix_norms(series.terms(), f.order, level)
    spectrum = analyze(g_l)
    full = spectrum.support(eq_tol * 1e-4)
    greedy_error = norm(greedy_approximant(full, len(full), level) - g_l, 1)
    residual_l1 = norm(series_values.refine(level) - g_l, 1)
    # the leftover residual shifts each coefficient by at most its L1 norm
    at_series = spectrum.dense(level)[series.indices]
    discrepancy = float(np.max(np.abs(at_series - series.coefficients), initial=0.0))

    conclusions = [
        check("disagreement_measure", measure, "<", Fraction(eps)),
        check("kept_measure", kept_set.measure, ">", 1 - Fraction(eps)),
        within(
            "equal_on_kept_set",
            float(np.max(np.abs(g_l.values[kept] - f_l.values[kept]), initial=0.0)),
            scale,
        ),
        check("g_norm_lower", norm_g, ">", 0.5 * norm_f),
        check("g_norm_upper", norm_g, "<", 4 * norm_f),
        within("magnitudes_nonincreasing", float(np.diff(magnitudes).max(initial=0.0)), MAGNITUDE_RTOL * max(top, 1e-300)),
        check(
            "prefix_bound",
            float(prefix.max(initial=0.0)),
            "<=",
            12 * norm_f,
            asserted=profile is BudgetProfile.VERBATIM,
        ),
        within("series_residual", residual_l1, tol),
        within("greedy_error", greedy_error, tol),
        within("spectrum_matches_series", discrepancy, 1e-9 + residual_l1),
    ]
    if len(step_ranges) >= 2:
        first = series.between(*step_ranges[0]).magnitudes
        last = series.between(*step_ranges[-1]).magnitudes
        conclusions.append(
            check("magnitude_decay", float(last.max(initial=0.0)), "<", float(first.max(initial=0.0)) / 4)
        )
    return conclusions


def _with_prefix_sups(trace: Sequence[StepRecord], series: WalshPolynomial, prefix: np.ndarray) -> Tuple[StepRecord, ...]:
    """Attach the largest prefix norm reached by the end of each step."""
    out = []
    for record in trace:
        low, high = record.block_range
        inside = np.flatnonzero((series.indices >= low) & (series.indices <= high))
        sup = float(prefix[: int(inside[-1]) + 1].max()) if inside.size else 0.0
        out.append(replace(record, partial_sum_sup_l1=sup))
    return tuple(out)


def correct_function(
    f: StepFunction,
    eps: float,
    tol: float,
    q_max: int,
    *,
    n0: int = 2,
    profile: BudgetProfile = BudgetProfile.VERBATIM,
    mode: Mode = "direct",
    search_depth: int = 2000,
    max_level: Optional[int] = None,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> CorrectionResult:
    """Correct f on a set of measure < eps into g with a monotone, bounded series."""
    if not 0 < eps < 1:
        raise InvalidParameterError(f"eps must lie in (0, 1), got {eps}")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if q_max < 1:
        raise InvalidParameterError(f"q_max must be >= 1, got {q_max}")
    if mode not in ("direct", "strict"):
        raise InvalidParameterError(f"unknown mode {mode!r}")
    norm_f = norm(f, 1)
    if norm_f <= 0:
        raise InvalidParameterError("cannot correct a function with zero L1 norm")

    # ∫_E|f| is not known before E is built; ‖f‖₁ bounds it from above
    base = min(eps / 2, norm_f)
    residual = f
    g = f
    kept_set = CellSet.full(f.order)
    parts: List[WalshPolynomial] = []
    steps: List[Lemma2Result] = []
    trace: List[StepRecord] = []
    next_n0 = n0
    cap = eps / 2
    stop_reason: StopReason = "q_max"

    for q in range(1, q_max + 1):
        budget = base * profile.factor(q)
        index: Optional[int] = None
        try:
            if mode == "strict":
                target, index, distance = _pick_dictionary_element(residual, search_depth, max_level=max_level)
            else:
                target, distance = residual, 0.0
            step = lemma2_construct(
                target,
                next_n0,
                budget,
                profile=profile,
                magnitude_cap=cap,
                max_level=max_level,
                eq_tol=eq_tol,
            )
        except (ResolutionError, InfeasibleError) as exc:
            if q == 1:
                raise
            stop_reason = "search_exhausted" if mode == "strict" and isinstance(exc, InfeasibleError) else "resolution"
            logger.warning("stopping at q=%d: %s", q, exc)
            break

        phi = step.step_approx.phi()
        g = g + (step.function - phi)
        residual = residual - phi
        kept_set = kept_set.intersection(step.kept_set)
        parts.append(step.polynomial)
        steps.append(step)

        magnitudes = step.polynomial.magnitudes
        high = step.n_max
        trace.append(
            StepRecord(
                q=q,
                budget=budget,
                target_distance=distance,
                residual_l1=norm(residual, 1),
                block_range=(next_n0, high),
                block_magnitude=float(magnitudes.max(initial=0.0)),
                min_magnitude=float(magnitudes.min(initial=0.0)),
                terms=len(step.polynomial),
                dictionary_index=index,
            )
        )
        logger.info(
            "q=%d residual=%.3e block=[%d, %d] magnitude=%.3e",
            q,
            trace[-1].residual_l1,
            next_n0,
            high,
            trace[-1].block_magnitude,
        )
        next_n0 = high + 1
        if len(step.polynomial):
            cap = float(np.nextafter(trace[-1].min_magnitude, np.inf))
        if trace[-1].residual_l1 <= tol:
            stop_reason = "converged"
            break

    series = WalshPolynomial.concatenate(f.order, parts)
    level = max(g.level, kept_set.level, series.required_level)
    g = g.refine(level)
    prefix = prefix_norms(series.terms(), f.order, level)
    trace_out = _with_prefix_sups(trace, series, prefix)
    conclusions = correction_conclusions(
        f,
        g,
        kept_set,
        series,
        series.synthesize(level, max_level=max_level),
        [r.block_range for r in trace_out],
        eps=eps,
        tol=tol,
        profile=profile,
        eq_tol=eq_tol,
        prefix=prefix,
    )
    certificate = Certificate(
        kind="correction",
        conclusions=tuple(conclusions),
        params={
            "order": f.order,
            "eps": eps,
            "tol": tol,
            "q_max": q_max,
            "n0": n0,
            "profile": profile.value,
            "mode": mode,
            "stop_reason": stop_reason,
            "level": level,
        },
        trace=tuple(_record_dict(r) for r in trace_out),
    )
    return CorrectionResult(
        f=f,
        g=g,
        kept_set=kept_set,
        series=series,
        trace=trace_out,
        eps=eps,
        tol=tol,
        q_max=q_max,
        n0=n0,
        profile=profile,
        mode=mode,
        stop_reason=stop_reason,
        certificate=certificate,
        steps=tuple(steps),
    )


def _record_dict(record: StepRecord) -> dict:
    return {
        "q": record.q,
        "budget": record.budget,
        "residual_l1": record.residual_l1,
        "block_range": list(record.block_range),
        "block_magnitude": record.block_magnitude,
        "partial_sum_sup_l1": record.partial_sum_sup_l1,
    }


@dataclass(frozen=True, eq=False)
class UniversalSeries:
    """Truncated universal series: one corrector block per dictionary element."""

    order: int
    eps: float
    blocks: Tuple[Optional[Lemma2Result], ...]
    kept_set: CellSet
    profile: BudgetProfile

    @property
    def n_reached(self) -> int:
        return len(self.blocks)

    @property
    def measure_bound(self) -> Fraction:
        """1 - ε·Σ_{n<=n_max} factor(n), the guaranteed lower bound on |E|."""
        total = sum(Fraction(self.profile.factor(n)) for n in range(1, self.n_reached + 1))
        return 1 - Fraction(self.eps) * total

    @property
    def series(self) -> WalshPolynomial:
        return WalshPolynomial.concatenate(self.order, [b.polynomial for b in self.blocks if b is not None])


def universal_series(
    eps: float,
    n_max: int,
    n0: int = 2,
    *,
    order: int = 2,
    profile: BudgetProfile = BudgetProfile.VERBATIM,
    max_level: Optional[int] = None,
) -> UniversalSeries:
    """Correct dictionary elements 1..n_max in turn with chained index ranges.

    The zero element needs no correction and contributes an empty block with
    E_n = [0, 1).
    """
    if not 0 < eps < 1:
        raise InvalidParameterError(f"eps must lie in (0, 1), got {eps}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    blocks: List[Optional[Lemma2Result]] = []
    kept_set = CellSet.full(order)
    next_n0 = n0
    previous: Optional[float] = None
    for n in range(1, n_max + 1):
        element = dictionary_step(n, order, max_level=max_level)
        if not np.any(element.values):
            blocks.append(None)
            continue
        cap = 1.0 / n
        if previous is not None:
            cap = min(cap, float(np.nextafter(previous, np.inf)))
        try:
            block = lemma2_construct(
                element,
                next_n0,
                eps * profile.factor(n),
                profile=profile,
                magnitude_cap=cap,
                max_level=max_level,
            )
        except ResolutionError as exc:
            raise ResolutionError(
                f"universal series stopped at n={n}: {exc}",
                required_level=exc.required_level,
                max_level=exc.max_level,
            ) from exc
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"universal series stopped at n={n}: {exc}", achieved_residual=exc.achieved_residual
            ) from exc
        blocks.append(block)
        kept_set = kept_set.intersection(block.kept_set)
        next_n0 = block.n_max + 1
        if len(block.polynomial):
            previous = float(block.polynomial.magnitudes.min())
        logger.info("universal block n=%d: %d terms up to index %d", n, len(block.polynomial), next_n0 - 1)
    return UniversalSeries(order, eps, tuple(blocks), kept_set, profile)

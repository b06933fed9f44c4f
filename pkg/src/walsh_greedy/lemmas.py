"""Single-interval and whole-function correction polynomials.

`lemma1_construct` spreads the spectrum of γ·χ_Δ over a block of indices
[N0, N] using the dilated Men'shov kernel, so the resulting polynomial
equals γ on most of Δ while every coefficient has the same small magnitude.
`lemma2_construct` chains such blocks over a step approximation of f so the
magnitudes of the combined polynomial never increase with the index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from math import sqrt
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .adic import AdicInterval, CellSet, StepFunction, dilate, indicator, menshov_kernel, norm
from .certificates import Certificate, Conclusion, check, within
from .chrestenson import Spectrum, analyze, evaluate_terms, synthesize
from .config import BudgetProfile, check_level, resolve_max_level
from .errors import InfeasibleError, InvalidParameterError
from .greedy import prefix_norms

logger = logging.getLogger(__name__)

DEFAULT_EQ_TOL = 1e-10
# analysed coefficients below this fraction of |γ|·a^-m are transform noise
SUPPORT_RTOL = 1e-6
MAGNITUDE_RTOL = 1e-9
DEFAULT_MAX_INTERVALS = 1 << 16


def _floor_log(order: int, value: Fraction) -> int:
    """Largest t >= 0 with order**t <= value (value >= 1)."""
    t = 0
    while order ** (t + 1) <= value:
        t += 1
    return t


def _check_eps(eps: float, what: str = "eps") -> Fraction:
    if not 0 < eps < 1:
        raise InvalidParameterError(f"{what} must lie in (0, 1), got {eps}")
    return Fraction(eps)


def _check_n0(n0: int) -> None:
    if int(n0) != n0 or n0 <= 1:
        raise InvalidParameterError(f"N0 must be an integer > 1, got {n0}")


def _is_power(order: int, value: int) -> bool:
    while value % order == 0:
        value //= order
    return value == 1


@dataclass(frozen=True, eq=False)
class WalshPolynomial:
    """Σ c_k ψ_{n_k} with strictly increasing n_k and no zero coefficients."""

    order: int
    indices: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        coefficients = np.asarray(self.coefficients, dtype=np.complex128).reshape(-1)
        if indices.size != coefficients.size:
            raise InvalidParameterError("indices and coefficients differ in length")
        keep = coefficients != 0
        indices, coefficients = indices[keep], coefficients[keep]
        if indices.size and (indices[0] < 0 or np.any(np.diff(indices) <= 0)):
            raise InvalidParameterError("polynomial indices must be non-negative and strictly increasing")
        indices.setflags(write=False)
        coefficients.setflags(write=False)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def empty(cls, order: int) -> "WalshPolynomial":
        return cls(order, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128))

    @classmethod
    def from_terms(cls, order: int, terms: Iterable[Tuple[int, complex]]) -> "WalshPolynomial":
        pairs = list(terms)
        return cls(
            order,
            np.array([n for n, _ in pairs], dtype=np.int64),
            np.array([c for _, c in pairs], dtype=np.complex128),
        )

    @classmethod
    def from_spectrum(cls, spectrum: Spectrum, threshold: float = 0.0) -> "WalshPolynomial":
        support = spectrum.support(threshold)
        return cls(spectrum.order, support.indices, support.values)

    @classmethod
    def concatenate(cls, order: int, parts: Sequence["WalshPolynomial"]) -> "WalshPolynomial":
        if not parts:
            return cls.empty(order)
        return cls(
            order,
            np.concatenate([p.indices for p in parts]),
            np.concatenate([p.coefficients for p in parts]),
        )

    def __len__(self) -> int:
        return int(self.indices.size)

    def terms(self) -> Iterator[Tuple[int, complex]]:
        for n, c in zip(self.indices.tolist(), self.coefficients.tolist()):
            yield int(n), complex(c)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)

    @property
    def max_index(self) -> int:
        return int(self.indices[-1]) if self.indices.size else -1

    @property
    def required_level(self) -> int:
        """Smallest J with every index below a^J."""
        level = 0
        while self.order**level <= self.max_index:
            level += 1
        return level

    def between(self, low: int, high: int) -> "WalshPolynomial":
        keep = (self.indices >= low) & (self.indices <= high)
        return WalshPolynomial(self.order, self.indices[keep], self.coefficients[keep])

    def scaled(self, factor: complex) -> "WalshPolynomial":
        return WalshPolynomial(self.order, self.indices, self.coefficients * factor)

    def to_spectrum(self, level: Optional[int] = None) -> Spectrum:
        level = self.required_level if level is None else level
        return Spectrum(self.order, level, self.indices, self.coefficients)

    def synthesize(self, level: Optional[int] = None, *, max_level: Optional[int] = None) -> StepFunction:
        """Fast synthesis on the level grid."""
        level = self.required_level if level is None else level
        return synthesize(self.to_spectrum(level), level, max_level=max_level)

    def evaluate(self, level: Optional[int] = None) -> StepFunction:
        """Direct term-by-term evaluation (no fast transform)."""
        level = self.required_level if level is None else level
        return evaluate_terms(self.order, level, self.terms())

    def __repr__(self) -> str:
        return f"WalshPolynomial(order={self.order}, terms={len(self)}, max_index={self.max_index})"


# ---------------------------------------------------------------------------
# single interval


@dataclass(frozen=True)
class Lemma1Params:
    gamma: complex
    n0: int
    eps: float
    interval: AdicInterval


@dataclass(frozen=True)
class Lemma1Derived:
    nu0: int
    s: int
    n_max: int
    level: int
    coeff_magnitude: float

    def predicted_support(self, order: int, m: int) -> np.ndarray:
        """{j·a^s + i : 1 <= j < a^ν0, 0 <= i < a^m}, ascending."""
        j = np.arange(1, order**self.nu0, dtype=np.int64)
        i = np.arange(order**m, dtype=np.int64)
        return (j[:, None] * order**self.s + i[None, :]).reshape(-1)


@dataclass(frozen=True, eq=False)
class Lemma1Result:
    params: Lemma1Params
    derived: Lemma1Derived
    polynomial: WalshPolynomial
    kept_set: CellSet
    certificate: Optional[Certificate] = None
    function: Optional[StepFunction] = None

    @property
    def order(self) -> int:
        return self.params.interval.order


def lemma1_plan(gamma: complex, n0: int, eps: float, interval: AdicInterval) -> Lemma1Derived:
    """ν0, s, N and the working level, by integer arithmetic only."""
    if gamma == 0:
        raise InvalidParameterError("gamma must be nonzero")
    exact_eps = _check_eps(eps)
    _check_n0(n0)
    order, m = interval.order, interval.level
    nu0 = _floor_log(order, 1 / exact_eps) + 1
    s = _floor_log(order, Fraction(int(n0))) + m
    n_max = order ** (s + nu0) + order**m - order**s - 1
    return Lemma1Derived(
        nu0=nu0,
        s=s,
        n_max=n_max,
        level=s + nu0,
        coeff_magnitude=abs(gamma) / order**m,
    )


def lemma1_conclusions(
    params: Lemma1Params,
    derived: Lemma1Derived,
    polynomial: WalshPolynomial,
    kept_set: CellSet,
    values: StepFunction,
    *,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> List[Conclusion]:
    """Every claim about a single-interval polynomial, checked against `values` = P."""
    interval = params.interval
    order, m = interval.order, interval.level
    gamma = complex(params.gamma)
    size = abs(gamma) * float(interval.measure)
    level = max(derived.level, values.level, kept_set.level)
    p = values.refine(level).values
    kept = kept_set.mask(level)
    inside = indicator(interval, level).values.real > 0

    magnitudes = polynomial.magnitudes
    if len(polynomial):
        deviation = float(np.max(np.abs(magnitudes - derived.coeff_magnitude))) / derived.coeff_magnitude
    else:
        deviation = float("inf")
    predicted = derived.predicted_support(order, m)
    mismatch = np.setxor1d(predicted, polynomial.indices).size
    l1 = norm(values, 1)
    prefix = prefix_norms(polynomial.terms(), order, level)
    prefix_max = float(prefix.max(initial=0.0))
    scale = eq_tol * abs(gamma)

    return [
        within("coefficient_magnitudes", deviation, MAGNITUDE_RTOL),
        check(
            "min_index",
            int(polynomial.indices[0]) if len(polynomial) else -1,
            ">=",
            params.n0,
            asserted=m >= 1,
            note=None if m >= 1 else "level-0 support starts at a^s <= N0",
        ),
        check("max_index", polynomial.max_index, "<=", derived.n_max),
        check("predicted_support", mismatch, "==", 0, note="closed-form support {j*a^s + i}"),
        check("kept_measure", kept_set.measure, ">", (1 - Fraction(params.eps)) * interval.measure),
        check("kept_set_inside_interval", int(np.count_nonzero(kept & ~inside)), "==", 0),
        within("values_on_kept_set", float(np.max(np.abs(p[kept] - gamma), initial=0.0)), scale),
        within("zero_off_interval", float(np.max(np.abs(p[~inside]), initial=0.0)), scale),
        check("l1_norm_lower", l1, ">", 0.5 * size),
        check("l1_norm_upper", l1, "<", 2 * size),
        check("prefix_bound", prefix_max, "<", order * abs(gamma) * sqrt(float(interval.measure) / params.eps)),
        check(
            "identity_kept_measure",
            kept_set.measure,
            "==",
            Fraction(1, order**m) * (1 - Fraction(1, order**derived.nu0)),
        ),
        within(
            "identity_l1_norm",
            abs(l1 - 2 * size * (1 - order ** (-derived.nu0))) / size,
            eq_tol,
        ),
    ]


def lemma1_construct(
    gamma: complex,
    n0: int,
    eps: float,
    interval: AdicInterval,
    *,
    max_level: Optional[int] = None,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> Lemma1Result:
    """P = γ·χ_Δ·I_ν0(a^s x) with its analysed coefficients and kept set E."""
    derived = lemma1_plan(gamma, n0, eps, interval)
    order = interval.order
    check_level(order, derived.level, max_level, f"block on interval {interval}")
    params = Lemma1Params(complex(gamma), int(n0), float(eps), interval)

    kernel = menshov_kernel(AdicInterval(order, derived.nu0, 1), derived.nu0)
    values = complex(gamma) * indicator(interval, derived.level) * dilate(kernel, derived.s)
    spectrum = analyze(values)
    polynomial = WalshPolynomial.from_spectrum(spectrum, SUPPORT_RTOL * derived.coeff_magnitude)
    kept_set = CellSet.from_mask(order, derived.level, values.values == complex(gamma))

    certificate = Certificate(
        kind="lemma1",
        conclusions=tuple(lemma1_conclusions(params, derived, polynomial, kept_set, values, eq_tol=eq_tol)),
        params={
            "order": order,
            "gamma": [params.gamma.real, params.gamma.imag],
            "n0": params.n0,
            "eps": params.eps,
            "interval": str(interval),
            "nu0": derived.nu0,
            "s": derived.s,
            "N": derived.n_max,
            "level": derived.level,
        },
    )
    logger.debug(
        "lemma1 on %s: nu0=%d s=%d indices [%d, %d] |c|=%.6g",
        interval,
        derived.nu0,
        derived.s,
        n0,
        derived.n_max,
        derived.coeff_magnitude,
    )
    return Lemma1Result(params, derived, polynomial, kept_set, certificate, values)


# ---------------------------------------------------------------------------
# step approximation


@dataclass(frozen=True, eq=False)
class StepApproximation:
    """φ = Σ γ_ν χ_{Δ_ν}, blocks ordered by |γ_ν||Δ_ν| descending then left endpoint."""

    order: int
    intervals: Tuple[AdicInterval, ...]
    gammas: Tuple[complex, ...]
    residual: float = 0.0
    budget: float = float("inf")
    magnitude_cap: float = float("inf")
    smallness_bound: Optional[float] = None
    dropped: int = 0

    @property
    def products(self) -> Tuple[float, ...]:
        return tuple(abs(g) * float(i.measure) for i, g in zip(self.intervals, self.gammas))

    @property
    def level(self) -> int:
        return max((i.level for i in self.intervals), default=0)

    def __len__(self) -> int:
        return len(self.intervals)

    def phi(self, level: Optional[int] = None) -> StepFunction:
        level = self.level if level is None else level
        values = np.zeros(self.order**level, dtype=np.complex128)
        for interval, gamma in zip(self.intervals, self.gammas):
            cells = interval.cells(level)
            values[cells.start : cells.stop] = gamma
        return StepFunction(self.order, level, values)


def _constant_pieces(f: StepFunction, min_level: int) -> List[Tuple[AdicInterval, complex]]:
    """Maximal a-adic intervals of level >= min_level on which f is constant."""
    level = max(f.level, min_level)
    values = f.refine(level).values
    covered = np.zeros(values.size, dtype=bool)
    pieces: List[Tuple[AdicInterval, complex]] = []
    for m in range(min_level, level + 1):
        rows = values.reshape(f.order**m, -1)
        claimed = covered.reshape(f.order**m, -1)
        fresh = np.all(rows == rows[:, :1], axis=1) & ~claimed.any(axis=1)
        for cell in np.flatnonzero(fresh).tolist():
            pieces.append((AdicInterval.from_cell(f.order, m, cell), complex(rows[cell, 0])))
        claimed[fresh] = True
    return pieces


def _split_level(
    order: int,
    level: int,
    gamma: complex,
    cap: float,
    smallness: Optional[float],
    max_level: int,
) -> Optional[int]:
    """Coarsest level >= `level` meeting the product cap (and smallness), or None."""
    magnitude = abs(gamma)
    for t in range(level, max_level + 1):
        width = float(order) ** (-t)
        if magnitude * width < cap and (smallness is None or magnitude**2 * width < smallness):
            return t
    return None


def step_approximate(
    f: StepFunction,
    eps: float,
    norm_f: Optional[float] = None,
    *,
    magnitude_cap: Optional[float] = None,
    profile: BudgetProfile = BudgetProfile.VERBATIM,
    min_level: int = 1,
    max_level: Optional[int] = None,
    max_intervals: int = DEFAULT_MAX_INTERVALS,
) -> StepApproximation:
    """Disjoint a-adic intervals approximating f within min(ε/4, ε‖f‖₁/4).

    Each maximal constant interval of f is split until its product |γ||Δ| is
    below `magnitude_cap` (default ε/2) and, under the verbatim profile,
    |γ|²|Δ| < ε³‖f‖₁²/(16a²). The smallest-mass intervals are then dropped
    while the accumulated residual stays inside the budget.
    """
    exact_eps = _check_eps(eps)
    norm_f = norm(f, 1) if norm_f is None else norm_f
    if norm_f <= 0:
        raise InvalidParameterError("cannot approximate a function with zero L1 norm")
    order = f.order
    ceiling = resolve_max_level(order, max_level)
    cap = float(exact_eps / 2) if magnitude_cap is None else float(magnitude_cap)
    smallness = float(exact_eps**3) * norm_f**2 / (16 * order**2) if profile is BudgetProfile.VERBATIM else None
    budget = min(eps / 4, eps * norm_f / 4)

    planned: List[Tuple[int, int, complex, float]] = []  # level, zero-based cell, gamma, product
    unplaced = 0.0
    count = 0
    pieces = [(i, g) for i, g in _constant_pieces(f, min_level) if g != 0]
    for interval, gamma in pieces:
        level = _split_level(order, interval.level, gamma, cap, smallness, ceiling)
        if level is None:
            unplaced += abs(gamma) * float(interval.measure)
            continue
        width = order ** (level - interval.level)
        count += width
        if count > max_intervals:
            raise InfeasibleError(
                f"step approximation needs more than {max_intervals} intervals",
                achieved_residual=norm_f,
            )
        product = abs(gamma) * order ** (-level)
        first = (interval.index - 1) * width
        planned.extend((level, first + r, gamma, product) for r in range(width))
    if unplaced >= budget:
        raise InfeasibleError(
            f"intervals needing more than level {ceiling} carry mass {unplaced:.6g} >= budget {budget:.6g}",
            achieved_residual=unplaced,
        )

    # drop from the smallest product; among equals, the rightmost first
    residual = unplaced
    by_mass = sorted(range(len(planned)), key=lambda k: (planned[k][3], -Fraction(planned[k][1], order ** planned[k][0])))
    dropped = set()
    for k in by_mass:
        if residual + planned[k][3] >= budget:
            break
        residual += planned[k][3]
        dropped.add(k)

    kept = [planned[k] for k in range(len(planned)) if k not in dropped]
    kept.sort(key=lambda item: (-item[3], Fraction(item[1], order ** item[0])))
    approx = StepApproximation(
        order=order,
        intervals=tuple(AdicInterval.from_cell(order, level, cell) for level, cell, _, _ in kept),
        gammas=tuple(gamma for _, _, gamma, _ in kept),
        budget=budget,
        magnitude_cap=cap,
        smallness_bound=smallness,
        dropped=len(dropped),
    )
    level = max(f.level, approx.level)
    achieved = norm(f.refine(level) - approx.phi(level), 1)
    logger.debug(
        "step approximation: %d pieces -> %d intervals (%d dropped), residual %.3g < %.3g",
        len(pieces),
        len(approx),
        len(dropped),
        achieved,
        budget,
    )
    return replace(approx, residual=achieved)


def step_conclusions(approx: StepApproximation, f: StepFunction, *, profile: BudgetProfile) -> List[Conclusion]:
    level = max(f.level, approx.level)
    residual = norm(f.refine(level) - approx.phi(level), 1)
    products = approx.products
    gaps = [a - b for a, b in zip(products, products[1:])]
    conclusions = [
        check("step_residual", residual, "<", approx.budget),
        check("products_below_cap", max(products, default=0.0), "<", approx.magnitude_cap),
        check(
            "products_strictly_decreasing",
            min(gaps, default=1.0),
            ">",
            0.0,
            asserted=False,
            note="ties are ordered by left endpoint",
        ),
    ]
    if approx.smallness_bound is not None:
        worst = max((abs(g) ** 2 * float(i.measure) for i, g in zip(approx.intervals, approx.gammas)), default=0.0)
        conclusions.append(
            check("block_smallness", worst, "<", approx.smallness_bound, asserted=profile is BudgetProfile.VERBATIM)
        )
    return conclusions


# ---------------------------------------------------------------------------
# whole function


@dataclass(frozen=True)
class BlockPlan:
    interval: AdicInterval
    gamma: complex
    n0: int
    derived: Lemma1Derived


@dataclass(frozen=True, eq=False)
class Lemma2Result:
    f: StepFunction
    g: StepFunction
    kept_set: CellSet
    polynomial: WalshPolynomial
    step_approx: StepApproximation
    n0: int
    eps: float
    magnitude_cap: Optional[float]
    profile: BudgetProfile
    blocks: Tuple[Lemma1Result, ...] = ()
    certificate: Optional[Certificate] = None
    function: Optional[StepFunction] = None

    @property
    def order(self) -> int:
        return self.f.order

    @property
    def level(self) -> int:
        return self.g.level

    @property
    def n_max(self) -> int:
        """Last index reserved by the block chain."""
        plans = plan_blocks(self.step_approx, self.n0, self.eps)
        return plans[-1].derived.n_max if plans else self.n0 - 1


def plan_blocks(approx: StepApproximation, n0: int, eps: float, *, max_level: Optional[int] = None) -> List[BlockPlan]:
    """Chain the block index ranges: block ν starts right after block ν-1 ends."""
    plans: List[BlockPlan] = []
    start = n0
    for number, (interval, gamma) in enumerate(zip(approx.intervals, approx.gammas), start=1):
        derived = lemma1_plan(gamma, start, eps, interval)
        check_level(approx.order, derived.level, max_level, f"block {number} of {len(approx)}")
        plans.append(BlockPlan(interval, gamma, start, derived))
        start = derived.n_max + 1
    return plans


def kept_set_from_blocks(order: int, level: int, blocks: Iterable[Tuple[AdicInterval, CellSet]]) -> CellSet:
    """[0,1) with every Δ_ν \\ E_ν removed."""
    mask = np.ones(order**level, dtype=bool)
    for interval, kept in blocks:
        cells = interval.cells(level)
        mask[cells.start : cells.stop] = kept.mask(level)[cells.start : cells.stop]
    return CellSet.from_mask(order, level, mask)


def lemma2_conclusions(
    f: StepFunction,
    g: StepFunction,
    kept_set: CellSet,
    polynomial: WalshPolynomial,
    values: StepFunction,
    approx: StepApproximation,
    plans: Sequence[BlockPlan],
    *,
    eps: float,
    magnitude_cap: Optional[float],
    profile: BudgetProfile,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> List[Conclusion]:
    """Every claim about a whole-function corrector, checked against `values` = P."""
    level = max(f.level, g.level, values.level, kept_set.level, approx.level)
    f_l, g_l, p_l = f.refine(level), g.refine(level), values.refine(level)
    kept = kept_set.mask(level)
    norm_f, norm_g = norm(f, 1), norm(g, 1)
    scale = eq_tol * max(1.0, float(np.max(np.abs(f.values))))
    magnitudes = polynomial.magnitudes
    rises = np.diff(magnitudes)
    bound = eps if magnitude_cap is None else magnitude_cap
    top = float(magnitudes.max(initial=0.0))

    block_deviation = 0.0
    for plan in plans:
        product = abs(plan.gamma) * float(plan.interval.measure)
        block = polynomial.between(plan.n0, plan.derived.n_max).magnitudes
        if block.size != plan.derived.predicted_support(approx.order, plan.interval.level).size:
            block_deviation = float("inf")
            break
        block_deviation = max(block_deviation, float(np.max(np.abs(block - product), initial=0.0)) / product)
    covered = sum(
        polynomial.between(plan.n0, plan.derived.n_max).indices.size for plan in plans
    )

    prefix = prefix_norms(polynomial.terms(), approx.order, level)
    residual_identity = abs(norm(p_l - g_l, 1) - norm(f_l - approx.phi(level), 1))

    conclusions = [
        check("kept_measure", kept_set.measure, ">", 1 - Fraction(eps)),
        within("equal_on_kept_set", float(np.max(np.abs(g_l.values[kept] - f_l.values[kept]), initial=0.0)), scale),
        check("g_norm_lower", norm_g, ">", 0.5 * norm_f),
        check("g_norm_upper", norm_g, "<", 3 * norm_f),
        check("polynomial_distance", norm(p_l - g_l, 1), "<", eps),
        check("magnitude_bound", top, "<", bound),
        within("magnitudes_nonincreasing", float(rises.max(initial=0.0)), MAGNITUDE_RTOL * max(top, 1e-300)),
        check("magnitudes_positive", float(magnitudes.min(initial=0.0)), ">", 0.0),
        check(
            "prefix_bound",
            float(prefix.max(initial=0.0)),
            "<",
            3 * norm_f,
            asserted=profile is BudgetProfile.VERBATIM,
        ),
        within("residual_identity", residual_identity, eq_tol),
        within("block_magnitudes_match_products", block_deviation, MAGNITUDE_RTOL),
        check("terms_inside_blocks", len(polynomial) - covered, "==", 0),
    ]
    conclusions.extend(step_conclusions(approx, f, profile=profile))
    return conclusions


def lemma2_construct(
    f: StepFunction,
    n0: int,
    eps: float,
    *,
    profile: BudgetProfile = BudgetProfile.VERBATIM,
    magnitude_cap: Optional[float] = None,
    max_level: Optional[int] = None,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> Lemma2Result:
    """g = P + f - φ with monotone coefficient magnitudes on chained index blocks."""
    _check_eps(eps)
    _check_n0(n0)
    norm_f = norm(f, 1)
    if norm_f <= 0:
        raise InvalidParameterError("cannot correct a function with zero L1 norm")
    order = f.order
    # a level-0 block keeps indices >= N0 only when N0 is a power of a
    min_level = 0 if _is_power(order, int(n0)) else 1
    approx = step_approximate(
        f,
        eps,
        norm_f,
        magnitude_cap=magnitude_cap,
        profile=profile,
        min_level=min_level,
        max_level=max_level,
    )
    plans = plan_blocks(approx, int(n0), eps, max_level=max_level)
    level = max([f.level, approx.level] + [p.derived.level for p in plans])
    logger.debug("lemma2: %d blocks, working level %d", len(plans), level)

    blocks = tuple(
        lemma1_construct(plan.gamma, plan.n0, eps, plan.interval, max_level=max_level, eq_tol=eq_tol)
        for plan in plans
    )
    p_values = np.zeros(order**level, dtype=np.complex128)
    for block in blocks:
        p_values += block.function.refine(level).values
    values = StepFunction(order, level, p_values)
    polynomial = WalshPolynomial.concatenate(order, [b.polynomial for b in blocks])
    g = values + f.refine(level) - approx.phi(level)
    kept_set = kept_set_from_blocks(order, level, ((b.params.interval, b.kept_set) for b in blocks))

    certificate = Certificate(
        kind="lemma2",
        conclusions=tuple(
            lemma2_conclusions(
                f,
                g,
                kept_set,
                polynomial,
                values,
                approx,
                plans,
                eps=eps,
                magnitude_cap=magnitude_cap,
                profile=profile,
                eq_tol=eq_tol,
            )
        ),
        params={
            "order": order,
            "n0": int(n0),
            "eps": float(eps),
            "magnitude_cap": magnitude_cap,
            "profile": profile.value,
            "blocks": len(blocks),
            "level": level,
        },
    )
    return Lemma2Result(
        f=f,
        g=g,
        kept_set=kept_set,
        polynomial=polynomial,
        step_approx=approx,
        n0=int(n0),
        eps=float(eps),
        magnitude_cap=magnitude_cap,
        profile=profile,
        blocks=blocks,
        certificate=certificate,
        function=values,
    )

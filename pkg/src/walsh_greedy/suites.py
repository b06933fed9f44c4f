"""Seeded property suites shared by the test-suite and `walsh-greedy selftest`.

Each suite returns a SuiteResult counting its checks and collecting failure
messages. Constructions that cannot fit the resolution ceiling are recorded
as infeasible: such a suite is not failed, but its criterion is not met
either, and it reports NOT-MET instead of PASS.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .adic import AdicInterval, StepFunction, indicator, sample_function
from .chrestenson import (
    cell_digits,
    index_digits,
    phase_table,
    rademacher_eval,
    root_of_unity_sum,
    walsh_eval,
    walsh_exponents,
    analyze,
    synthesize,
)
from .config import BudgetProfile
from .driver import correct_function
from .errors import InfeasibleError, ResolutionError
from .lemmas import lemma1_construct, lemma2_construct
from .verify import verify_certificate

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    infeasible: List[str] = field(default_factory=list)
    scope: str = ""  # caps that bound the inputs actually run
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def met(self) -> bool:
        return self.passed and not self.infeasible

    @property
    def status(self) -> str:
        if not self.passed:
            return "FAIL"
        return "PASS" if self.met else "NOT-MET"

    def expect(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.failures.append(message)


def _timed(run: Callable[..., SuiteResult]) -> Callable[..., SuiteResult]:
    def wrapper(*args, **kwargs) -> SuiteResult:
        start = time.perf_counter()
        result = run(*args, **kwargs)
        result.elapsed = time.perf_counter() - start
        logger.info("%s: %s, %d checks in %.2fs", result.name, result.status, result.checks, result.elapsed)
        return result

    wrapper.__name__ = run.__name__
    wrapper.__doc__ = run.__doc__
    return wrapper


def _cases(max_cells: int) -> List[Tuple[int, int]]:
    return [(a, level) for a in (2, 3, 4, 5) for level in range(1, 9) if a**level <= max_cells]


@_timed
def orthonormality(max_cells: int = 1024) -> SuiteResult:
    """Gram matrices of {ψ_n} on level-J grids equal the identity."""
    result = SuiteResult("orthonormality", scope=f"a in 2..5, J <= 6, a^J <= {max_cells}")
    for order, level in [(a, j) for a in (2, 3, 4, 5) for j in range(0, 7) if a**j <= max_cells]:
        cells = order**level
        rows = np.array([phase_table(order)[walsh_exponents(order, level, n)] for n in range(cells)])
        gram = rows @ rows.conj().T / cells
        deviation = float(np.max(np.abs(gram - np.eye(cells))))
        result.expect(deviation < 1e-10, f"a={order} J={level}: Gram deviation {deviation:.3g}")
    for order in (2, 3, 4, 5):
        for m in range(2 * order):
            expected = order if m % order == 0 else 0
            result.expect(
                abs(root_of_unity_sum(order, m) - expected) < 1e-12,
                f"root-of-unity sum a={order} m={m}",
            )
    return result


@_timed
def transform_oracle(seed: int = 0, inputs: int = 50, max_cells: int = 4096, tol: float = 1e-9) -> SuiteResult:
    """Fast and naive analysis agree; synthesis inverts analysis."""
    result = SuiteResult("transform_oracle", scope=f"a in 2..5, J <= 8, a^J <= {max_cells}, {inputs} inputs each")
    rng = np.random.default_rng(seed)
    for order, level in _cases(max_cells):
        for _ in range(inputs):
            values = rng.standard_normal(order**level) + 1j * rng.standard_normal(order**level)
            f = StepFunction(order, level, values)
            fast = analyze(f, "fast")
            naive = analyze(f, "naive", naive_max_cells=max_cells)
            gap = float(np.max(np.abs(fast.dense() - naive.dense())))
            result.expect(gap < tol, f"a={order} J={level}: fast/naive gap {gap:.3g}")
            back = synthesize(fast)
            error = float(np.max(np.abs(back.values - values)))
            result.expect(error < 1e-10, f"a={order} J={level}: round-trip error {error:.3g}")
    return result


@_timed
def lemma1_certificates(seed: int = 0, draws: int = 100) -> SuiteResult:
    """Random single-interval constructions certify, and re-verify, cleanly."""
    result = SuiteResult("lemma1_certificates", scope=f"{draws} draws, a in (2, 3, 5), m in 1..3")
    rng = np.random.default_rng(seed)
    for draw in range(draws):
        order = int(rng.choice([2, 3, 5]))
        m = int(rng.integers(1, 4))
        k = int(rng.integers(1, order**m + 1))
        eps = float(rng.uniform(0.05, 0.9))
        gamma = complex(rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        n0 = int(rng.integers(2, 51))
        label = f"draw {draw} (a={order}, m={m}, k={k}, eps={eps:.3f}, N0={n0})"
        try:
            built = lemma1_construct(gamma, n0, eps, AdicInterval(order, m, k))
        except ResolutionError:
            result.infeasible.append(label)
            continue
        for conclusion in built.certificate.failures():
            result.failures.append(f"{label}: {conclusion.name}")
        result.checks += len(built.certificate.conclusions)

    built = lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1))
    derived = built.derived
    result.expect((derived.nu0, derived.s, derived.n_max) == (2, 2, 13), "worked instance: nu0, s, N")
    result.expect(built.kept_set.measure == Fraction(3, 8), "worked instance: |E| = 3/8")
    result.expect(abs(built.certificate.get("l1_norm_upper").achieved_value - 0.75) < 1e-12, "worked instance: ∫|P| = 3/4")
    result.expect(verify_certificate(built).passed, "worked instance re-verifies")
    return result


def _random_step(rng: np.random.Generator, level: int) -> StepFunction:
    return StepFunction(2, level, rng.uniform(-1, 1, 2**level))


@_timed
def lemma2_certificates(
    seed: int = 0,
    random_functions: int = 10,
    level: int = 4,
    battery: int = 12,
) -> SuiteResult:
    """Whole-function correctors under verbatim constants, then a feasible relaxed battery."""
    result = SuiteResult(
        "lemma2_certificates",
        scope=f"verbatim: {random_functions + 2} functions at J={level}; relaxed battery of {battery}",
    )
    rng = np.random.default_rng(seed)
    targets: List[Tuple[str, StepFunction]] = [
        ("x - 1/2", sample_function(lambda x: x - 0.5, 2, level)),
        ("sign(x - 1/3)", sample_function(lambda x: np.sign(x - 1 / 3), 2, level, oversample=8)),
    ]
    targets += [(f"random {i}", _random_step(rng, level)) for i in range(random_functions)]
    for name, f in targets:
        for eps in (0.1, 0.3):
            try:
                built = lemma2_construct(f, 2, eps)
            except (ResolutionError, InfeasibleError) as exc:
                result.infeasible.append(f"{name}, eps={eps}: {exc}")
                continue
            for conclusion in built.certificate.failures():
                result.failures.append(f"{name}, eps={eps}: {conclusion.name}")
            result.checks += len(built.certificate.conclusions)

    # single-block inputs γ·χ_Δ fit the ceiling for every eps
    for draw in range(battery):
        order = int(rng.choice([2, 3]))
        m = int(rng.integers(1, 3))
        interval = AdicInterval(order, m, int(rng.integers(1, order**m + 1)))
        eps = float(rng.choice([0.1, 0.3]))
        gamma = 0.9 * (eps / 2) / float(interval.measure) * rng.uniform(0.2, 1.0)
        f = gamma * indicator(interval, m)
        label = f"battery {draw} (a={order}, {interval}, eps={eps})"
        built = lemma2_construct(f, 2, eps, profile=BudgetProfile.RELAXED)
        for conclusion in built.certificate.failures():
            result.failures.append(f"{label}: {conclusion.name}")
        result.checks += len(built.certificate.conclusions)
        magnitudes = built.polynomial.magnitudes
        result.expect(
            bool(magnitudes.size) and magnitudes.min() > 0 and magnitudes.max() < eps,
            f"{label}: magnitudes in (0, eps)",
        )
        result.expect(verify_certificate(built).passed, f"{label}: re-verification")
    return result


@_timed
def correction_driver(levels: Sequence[int] = (8,), tol: float = 1e-3) -> SuiteResult:
    """The driver on f = x under verbatim budgets, then feasible relaxed runs."""
    result = SuiteResult("correction_driver", scope=f"verbatim f = x at J in {tuple(levels)}, tol={tol}")
    for level in levels:
        f = sample_function(lambda x: x, 2, level, oversample=16)
        try:
            run = correct_function(f, 0.25, tol, 8)
        except (ResolutionError, InfeasibleError) as exc:
            result.infeasible.append(f"f = x at J={level}: {exc}")
            continue
        for conclusion in run.certificate.failures():
            result.failures.append(f"f = x at J={level}: {conclusion.name}")
        result.checks += len(run.certificate.conclusions)

    feasible = [
        ("constant 0.2", StepFunction.constant(2, 0, 0.2)),
        ("[0.2, 0]", StepFunction(2, 1, [0.2, 0.0])),
    ]
    for name, f in feasible:
        run = correct_function(f, 0.5, 1e-9, 4, profile=BudgetProfile.RELAXED)
        result.expect(run.stop_reason == "converged", f"{name}: stop reason {run.stop_reason}")
        for conclusion in run.certificate.failures():
            result.failures.append(f"{name}: {conclusion.name}")
        result.checks += len(run.certificate.conclusions)
        result.expect(verify_certificate(run).passed, f"{name}: re-verification")
    return result


@_timed
def multiplicativity(orders: Sequence[int] = (2, 3), max_power: int = 3) -> SuiteResult:
    """ψ_i(x)·ψ_j(a^s x) = ψ_{j a^s + i}(x) and ψ_{a^k + j} = φ_k·ψ_j, on integer exponents."""
    result = SuiteResult("multiplicativity", scope=f"a in {tuple(orders)}, powers <= {max_power}")
    for order in orders:
        for s in range(1, max_power + 1):
            level = 2 * s
            grid = cell_digits(order, level).astype(np.int64)
            for j in range(order**s):
                dilated = np.zeros(order**level, dtype=np.int64)
                for t, beta in enumerate(index_digits(j, order)):
                    dilated += beta * grid[t + s]
                for i in range(order**s):
                    left = (walsh_exponents(order, level, i) + dilated) % order
                    right = walsh_exponents(order, level, j * order**s + i)
                    result.expect(
                        bool(np.array_equal(left, right)),
                        f"a={order} s={s} i={i} j={j}: product identity",
                    )
        for k in range(max_power + 1):
            level = k + 1
            for j in range(order**k):
                for cell in range(order**level):
                    x = Fraction(cell, order**level)
                    left = rademacher_eval(k, x, order) * walsh_eval(j, x, order)
                    right = walsh_eval(order**k + j, x, order)
                    result.expect(left.exponent == right.exponent, f"a={order} k={k} j={j} x={x}: Rademacher factor")
    return result


@_timed
def performance(level: int = 20, limit: Optional[float] = None) -> SuiteResult:
    """Fast analysis at a=2 on a^J cells; the time limit is enforced only when given."""
    bound = f"limit {limit}s" if limit is not None else "no time limit"
    result = SuiteResult("performance", scope=f"a=2, J={level}, {bound}")
    rng = np.random.default_rng(0)
    f = StepFunction(2, level, rng.standard_normal(2**level))
    start = time.perf_counter()
    spectrum = analyze(f)
    took = time.perf_counter() - start
    logger.info("fast analysis of %d cells took %.3fs", f.size, took)
    if limit is not None:
        result.expect(took < limit, f"fast analysis took {took:.3f}s >= {limit}s")
    error = float(np.max(np.abs(synthesize(spectrum).values - f.values)))
    result.expect(error < 1e-9, f"round-trip error {error:.3g} at J={level}")
    try:
        analyze(StepFunction.zeros(2, 9), "naive")
        result.expect(False, "naive analysis above level 8 was not refused")
    except ResolutionError:
        result.checks += 1
    return result


def run_all(seed: int = 0, *, time_limit: float = 1.0, transform_tol: float = 1e-9) -> List[SuiteResult]:
    return [
        orthonormality(),
        transform_oracle(seed, tol=transform_tol),
        lemma1_certificates(seed),
        lemma2_certificates(seed),
        correction_driver(),
        multiplicativity(),
        performance(limit=time_limit),
    ]

"""Re-derive every certificate from the raw artifacts of a result.

Polynomials are re-evaluated term by term (no fast transform) and all
measures are recounted from the stored cell sets, so a result whose stored
coefficients, kept set or function were altered after construction fails
the affected entries.
"""

from __future__ import annotations

from typing import Union

from .certificates import Certificate
from .driver import CorrectionResult, correction_conclusions
from .errors import InvalidParameterError
from .lemmas import (
    Lemma1Result,
    Lemma2Result,
    lemma1_conclusions,
    lemma1_plan,
    lemma2_conclusions,
    plan_blocks,
)

Result = Union[Lemma1Result, Lemma2Result, CorrectionResult]


def verify_certificate(result: Result) -> Certificate:
    """A fresh certificate; failures are entries, never exceptions."""
    if isinstance(result, Lemma1Result):
        return _verify_lemma1(result)
    if isinstance(result, Lemma2Result):
        return _verify_lemma2(result)
    if isinstance(result, CorrectionResult):
        return _verify_correction(result)
    raise InvalidParameterError(f"cannot verify {type(result).__name__}")


def _verify_lemma1(result: Lemma1Result) -> Certificate:
    params = result.params
    derived = lemma1_plan(params.gamma, params.n0, params.eps, params.interval)
    level = max(derived.level, result.kept_set.level)
    values = result.polynomial.evaluate(level)
    conclusions = lemma1_conclusions(params, derived, result.polynomial, result.kept_set, values)
    return Certificate(
        kind="lemma1",
        conclusions=tuple(conclusions),
        params=dict(result.certificate.params) if result.certificate else {},
    )


def _verify_lemma2(result: Lemma2Result) -> Certificate:
    plans = plan_blocks(result.step_approx, result.n0, result.eps)
    level = max([result.g.level, result.kept_set.level, result.polynomial.required_level] + [p.derived.level for p in plans])
    values = result.polynomial.evaluate(level)
    conclusions = lemma2_conclusions(
        result.f,
        result.g,
        result.kept_set,
        result.polynomial,
        values,
        result.step_approx,
        plans,
        eps=result.eps,
        magnitude_cap=result.magnitude_cap,
        profile=result.profile,
    )
    return Certificate(
        kind="lemma2",
        conclusions=tuple(conclusions),
        params=dict(result.certificate.params) if result.certificate else {},
    )


def _verify_correction(result: CorrectionResult) -> Certificate:
    level = max(result.g.level, result.kept_set.level, result.series.required_level)
    series_values = result.series.evaluate(level)
    conclusions = correction_conclusions(
        result.f,
        result.g,
        result.kept_set,
        result.series,
        series_values,
        [record.block_range for record in result.trace],
        eps=result.eps,
        tol=result.tol,
        profile=result.profile,
    )
    return Certificate(
        kind="correction",
        conclusions=tuple(conclusions),
        params=dict(result.certificate.params) if result.certificate else {},
        trace=result.certificate.trace if result.certificate else (),
    )

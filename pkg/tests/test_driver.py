"""Tests for the correction driver and the universal series."""

from fractions import Fraction

import numpy as np
import pytest

from walsh_greedy.adic import StepFunction, norm, sample_function
from walsh_greedy.config import BudgetProfile
from walsh_greedy.driver import _pick_dictionary_element, correct_function, correction_conclusions, universal_series
from walsh_greedy.errors import InfeasibleError, InvalidParameterError, ResolutionError
from walsh_greedy.greedy import greedy_error_curve
from walsh_greedy.lemmas import WalshPolynomial

RELAXED = BudgetProfile.RELAXED


def test_constant_converges_in_one_step():
    f = StepFunction.constant(2, 0, 0.2)
    run = correct_function(f, 0.5, 1e-9, 4, profile=RELAXED)

    assert run.stop_reason == "converged"
    assert len(run.trace) == 1
    record = run.trace[0]
    assert record.budget == pytest.approx(0.2 / 64)
    assert record.block_range == (2, 1022)
    assert run.series.indices.tolist() == list(range(2, 1023, 2))
    assert np.allclose(run.series.magnitudes, 0.2)
    assert norm(run.g, 1) == pytest.approx(0.4 * (1 - 2**-9))
    assert run.certificate.get("disagreement_measure").achieved_value == 2**-9
    assert run.certificate.passed


def test_half_interval_converges():
    f = StepFunction(2, 1, [0.2, 0.0])
    run = correct_function(f, 0.5, 1e-9, 4, profile=RELAXED)

    assert run.stop_reason == "converged"
    assert run.series.max_index == 2**12 + 2 - 4 - 1
    assert len(run.series) == 2046
    assert run.kept_set.measure == 1 - Fraction(1, 2**11)
    assert run.certificate.passed


def test_trace_carries_partial_sum_sups():
    f = StepFunction(2, 1, [0.2, 0.0])
    run = correct_function(f, 0.5, 1e-9, 4, profile=RELAXED)

    record = run.trace[0]
    assert record.partial_sum_sup_l1 is not None
    assert record.partial_sum_sup_l1 >= norm(run.g, 1) - 1e-12
    assert run.certificate.trace[0]["q"] == 1


def test_resolution_stop_is_reported():
    """The second step would need level 24, above the default ceiling of 20."""
    f = StepFunction(2, 1, [0.2, 1e-5])
    run = correct_function(f, 0.5, 1e-9, 4, profile=RELAXED)

    assert run.stop_reason == "resolution"
    assert len(run.trace) == 1
    assert run.trace[0].residual_l1 == pytest.approx(5e-6)
    assert not run.certificate.get("series_residual").passed
    assert not run.certificate.passed


def test_verbatim_budget_is_infeasible_at_desk_scale():
    f = sample_function(lambda x: x, 2, 8, oversample=16)

    with pytest.raises((InfeasibleError, ResolutionError)):
        correct_function(f, 0.25, 1e-3, 8)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"eps": 0.0},
        {"eps": 1.0},
        {"tol": 0.0},
        {"q_max": 0},
        {"mode": "fuzzy"},
    ],
)
def test_correct_rejects_bad_parameters(kwargs):
    args = {"eps": 0.5, "tol": 1e-3, "q_max": 2}
    args.update(kwargs)
    mode = args.pop("mode", "direct")

    with pytest.raises(InvalidParameterError):
        correct_function(StepFunction.constant(2, 0, 1.0), mode=mode, **args)


def test_correct_rejects_zero_function():
    with pytest.raises(InvalidParameterError):
        correct_function(StepFunction.zeros(2, 1), 0.5, 1e-3, 2)


def test_dictionary_search_finds_exact_element():
    residual = StepFunction.constant(2, 0, 0.5)
    element, index, distance = _pick_dictionary_element(residual, 8, max_level=None)

    assert index == 7
    assert distance == 0.0
    assert np.array_equal(element.values, [0.5])


def test_dictionary_search_without_progress_raises():
    residual = StepFunction.constant(2, 0, 0.5)

    with pytest.raises(InfeasibleError):
        _pick_dictionary_element(residual, 3, max_level=None)


def test_universal_series_skips_zero_element():
    series = universal_series(0.5, 1)

    assert series.n_reached == 1
    assert series.blocks == (None,)
    assert series.kept_set.measure == 1
    assert len(series.series) == 0
    assert series.measure_bound == 1 - Fraction(1, 2) * Fraction(1, 4**24)


def test_universal_series_names_the_failing_element():
    with pytest.raises((InfeasibleError, ResolutionError), match="n=2"):
        universal_series(0.5, 2)


def test_universal_series_rejects_bad_parameters():
    with pytest.raises(InvalidParameterError):
        universal_series(0.5, 0)
    with pytest.raises(InvalidParameterError):
        universal_series(1.5, 3)


def test_series_must_match_spectrum_of_g():
    f = StepFunction.constant(2, 0, 0.2)
    run = correct_function(f, 0.5, 1e-9, 4, profile=RELAXED)
    matched = run.certificate.get("spectrum_matches_series")
    assert matched.asserted and matched.passed

    coefficients = run.series.coefficients.copy()
    coefficients[0] += 1e-6
    altered = WalshPolynomial(2, run.series.indices, coefficients)
    conclusions = correction_conclusions(
        run.f,
        run.g,
        run.kept_set,
        altered,
        run.series.synthesize(run.level),
        [r.block_range for r in run.trace],
        eps=run.eps,
        tol=run.tol,
        profile=RELAXED,
    )
    failed = {c.name for c in conclusions if not c.passed}
    assert "spectrum_matches_series" in failed


def test_greedy_partial_sums_of_corrected_function_stay_bounded():
    """Dyadic values keep the equal magnitudes exact, so greedy follows the natural order."""
    f = StepFunction.constant(2, 0, 0.25)
    run = correct_function(f, 0.6, 1e-9, 4, profile=RELAXED)
    assert run.stop_reason == "converged"

    curve = greedy_error_curve(run.g, len(run.series), 1)
    assert len(curve) == len(run.series) + 1
    assert curve[-1].error < 1e-9
    assert max(point.partial_sum_norm_1 for point in curve) <= 12 * norm(f, 1)


def test_strict_mode_corrects_through_dictionary():
    """[1/2, 0] is dictionary entry 40, so the first strict step removes the whole residual."""
    f = StepFunction(2, 1, [0.5, 0.0])
    run = correct_function(f, 0.9, 1e-9, 4, profile=RELAXED, mode="strict", search_depth=64)

    assert run.mode == "strict"
    assert run.stop_reason == "converged"
    assert len(run.trace) == 1
    assert run.trace[0].dictionary_index == 40
    assert run.trace[0].target_distance == 0.0
    assert run.trace[0].residual_l1 == 0.0
    assert run.certificate.passed

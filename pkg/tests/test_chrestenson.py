"""Tests for Rademacher/Walsh evaluation and the radix-a transform."""

from fractions import Fraction

import numpy as np
import pytest

from walsh_greedy.adic import AdicInterval, StepFunction, indicator, norm
from walsh_greedy.chrestenson import (
    Spectrum,
    UnitPhase,
    analyze,
    cell_digits,
    evaluate_terms,
    index_digits,
    phase_table,
    point_digit,
    rademacher_eval,
    root_of_unity_sum,
    synthesize,
    walsh_eval,
    walsh_exponents,
    walsh_grid,
)
from walsh_greedy.errors import InvalidParameterError, PrecisionError, ResolutionError


def test_phase_table_is_exact_for_gaussian_integers():
    assert phase_table(4).tolist() == [1, 1j, -1, -1j]
    assert phase_table(2).tolist() == [1, -1]


def test_unit_phase_arithmetic():
    w = UnitPhase(3, 2)

    assert (w * w).exponent == 1
    assert (w**3).exponent == 0
    assert w.conjugate().exponent == 1
    with pytest.raises(InvalidParameterError):
        w * UnitPhase(2, 1)


def test_root_of_unity_sum():
    assert root_of_unity_sum(5, 10) == pytest.approx(5)
    assert abs(root_of_unity_sum(5, 3)) < 1e-12


def test_point_digits():
    assert point_digit(Fraction(5, 8), 1, 2) == 1
    assert point_digit(Fraction(5, 8), 2, 2) == 0
    assert point_digit(Fraction(5, 8), 3, 2) == 1
    assert point_digit("7/9", 2, 3) == 1
    assert point_digit([2, 1], 3, 3) == 0
    assert point_digit(Fraction(13, 8), 1, 2) == 1
    with pytest.raises(PrecisionError):
        point_digit([0, 3], 1, 3)
    with pytest.raises(PrecisionError):
        point_digit(float("nan"), 1, 2)


def test_points_without_finite_expansion_are_rejected():
    """1/3 is not dyadic, and no float is exactly 1/3 in base 3."""
    with pytest.raises(PrecisionError):
        rademacher_eval(0, Fraction(1, 3), order=2)
    with pytest.raises(PrecisionError):
        rademacher_eval(0, 1 / 3, order=3)
    with pytest.raises(PrecisionError):
        walsh_eval(1, 0.5, order=3)
    assert rademacher_eval(0, Fraction(1, 3), order=3).exponent == 1
    assert rademacher_eval(0, [1], order=3).exponent == 1
    assert rademacher_eval(1, Fraction(5, 6), order=6).exponent == 0
    assert rademacher_eval(0, 0.75, order=2).exponent == 1


def test_index_digits():
    assert index_digits(0, 3) == []
    assert index_digits(11, 3) == [2, 0, 1]
    with pytest.raises(InvalidParameterError):
        index_digits(-1, 2)


def test_rademacher_and_walsh_values():
    """ψ_1 = φ_0 flips sign on the right half; ψ_3 = φ_0·φ_1."""
    assert rademacher_eval(0, Fraction(1, 4)).value == 1
    assert rademacher_eval(0, Fraction(3, 4)).value == -1
    assert walsh_eval(0, Fraction(3, 4)).value == 1
    assert walsh_eval(3, Fraction(1, 4)).value == -1
    assert walsh_eval(3, Fraction(3, 4)).value == 1
    assert walsh_eval(5, Fraction(2, 9), order=3).exponent == (2 * 0 + 1 * 2) % 3


def test_walsh_exponents_match_pointwise_evaluation():
    order, level = 3, 3
    for n in range(order**level):
        exponents = walsh_exponents(order, level, n)
        for cell in (0, 5, 13, 26):
            x = Fraction(cell, order**level)
            assert exponents[cell] == walsh_eval(n, x, order).exponent


def test_cell_digits_rows_are_most_significant_first():
    digits = cell_digits(2, 3)

    assert digits[:, 5].tolist() == [1, 0, 1]


def test_walsh_grid_rejects_large_index():
    with pytest.raises(ResolutionError):
        walsh_grid(2, 2, 4)


def test_analyze_indicator_of_half():
    """χ_[0,1/2) = (ψ_0 + ψ_1)/2."""
    f = indicator(AdicInterval(2, 1, 1), 3)
    spectrum = analyze(f)

    assert spectrum.indices.tolist() == [0, 1]
    assert np.allclose(spectrum.values, [0.5, 0.5])


@pytest.mark.parametrize("order,level", [(2, 5), (3, 3), (4, 2), (5, 2)])
def test_fast_matches_naive(order, level):
    rng = np.random.default_rng(7)
    values = rng.standard_normal(order**level) + 1j * rng.standard_normal(order**level)
    f = StepFunction(order, level, values)

    fast = analyze(f, "fast").dense()
    naive = analyze(f, "naive").dense()
    assert np.max(np.abs(fast - naive)) < 1e-10
    assert np.max(np.abs(synthesize(analyze(f)).values - values)) < 1e-10


@pytest.mark.parametrize("order,level", [(2, 6), (3, 4), (5, 2)])
def test_analyze_preserves_l2_norm(order, level):
    rng = np.random.default_rng(11)
    values = rng.standard_normal(order**level) + 1j * rng.standard_normal(order**level)
    f = StepFunction(order, level, values)

    energy = float(np.sum(np.abs(analyze(f).values) ** 2))
    assert energy == pytest.approx(norm(f, 2) ** 2, rel=1e-12)


def test_naive_refuses_large_grids():
    with pytest.raises(ResolutionError):
        analyze(StepFunction.zeros(2, 9), "naive")
    with pytest.raises(InvalidParameterError):
        analyze(StepFunction.zeros(2, 2), "slow")


def test_synthesize_matches_direct_evaluation():
    spectrum = Spectrum.from_mapping(3, 2, {1: 1.0, 4: -0.5j, 8: 2.0})
    fast = synthesize(spectrum)
    direct = evaluate_terms(3, 2, spectrum.items())

    assert np.allclose(fast.values, direct.values)


def test_synthesize_on_finer_grid_and_ceiling():
    spectrum = Spectrum.from_mapping(2, 1, {1: 1.0})

    assert np.allclose(synthesize(spectrum, 2).values, [1, 1, -1, -1])
    with pytest.raises(ResolutionError):
        synthesize(spectrum, 4, max_level=3)


def test_spectrum_accessors():
    spectrum = Spectrum.from_mapping(2, 3, {5: 2.0, 1: 1e-20, 3: -1.0})

    assert spectrum.indices.tolist() == [1, 3, 5]
    assert spectrum.get(5) == 2.0
    assert spectrum.get(4) == 0
    assert len(spectrum.support(1e-14)) == 2
    assert spectrum.restrict([3]).as_dict() == {3: -1.0}
    with pytest.raises(ResolutionError):
        spectrum.dense(2)
    with pytest.raises(InvalidParameterError):
        Spectrum(2, 3, [1, 1], [1.0, 2.0])

"""Tests for the single-interval and whole-function correction polynomials."""

from fractions import Fraction

import numpy as np
import pytest

from walsh_greedy.adic import AdicInterval, StepFunction, norm, sample_function
from walsh_greedy.config import BudgetProfile
from walsh_greedy.errors import InfeasibleError, InvalidParameterError, ResolutionError
from walsh_greedy.lemmas import (
    WalshPolynomial,
    lemma1_construct,
    lemma1_plan,
    lemma2_construct,
    plan_blocks,
    step_approximate,
)


def test_polynomial_drops_zeros_and_requires_order():
    poly = WalshPolynomial.from_terms(2, [(1, 0.5), (3, 0.0), (6, -1.0)])

    assert poly.indices.tolist() == [1, 6]
    assert poly.max_index == 6
    assert poly.required_level == 3
    with pytest.raises(InvalidParameterError):
        WalshPolynomial.from_terms(2, [(3, 1.0), (2, 1.0)])


def test_polynomial_fast_and_direct_evaluation_agree():
    poly = WalshPolynomial.from_terms(3, [(2, 1.0), (5, 0.25j), (20, -0.5)])

    assert np.allclose(poly.synthesize(3).values, poly.evaluate(3).values)
    assert len(poly.between(3, 20)) == 2
    assert WalshPolynomial.empty(2).required_level == 0


def test_lemma1_plan_uses_exact_logarithms():
    """ε = 1/4 sits exactly on a power of 2, so ν0 = log2(4) + 1."""
    derived = lemma1_plan(1.0, 8, 0.25, AdicInterval(2, 2, 3))

    assert derived.nu0 == 3
    assert derived.s == 3 + 2
    assert derived.n_max == 2**8 + 2**2 - 2**5 - 1
    assert derived.level == 8
    assert derived.coeff_magnitude == 0.25


@pytest.mark.parametrize(
    "gamma,n0,eps",
    [(0, 2, 0.5), (1.0, 1, 0.5), (1.0, 2, 1.0), (1.0, 2, 0.0), (1.0, 2.5, 0.5)],
)
def test_lemma1_plan_rejects_bad_parameters(gamma, n0, eps):
    with pytest.raises(InvalidParameterError):
        lemma1_plan(gamma, n0, eps, AdicInterval(2, 1, 1))


def test_lemma1_worked_example():
    """a = 2, γ = 1, N0 = 2, ε = 0.4 on [0, 1/2)."""
    built = lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1))

    assert (built.derived.nu0, built.derived.s, built.derived.n_max) == (2, 2, 13)
    assert built.polynomial.indices.tolist() == [4, 5, 8, 9, 12, 13]
    assert np.allclose(built.polynomial.coefficients, -0.5)
    assert built.kept_set.measure == Fraction(3, 8)
    assert built.kept_set.members.tolist() == [1, 2, 3, 5, 6, 7]
    assert np.array_equal(built.function.values.real, [-3, 1, 1, 1, -3, 1, 1, 1] + [0] * 8)
    assert norm(built.function, 1) == pytest.approx(0.75)
    assert built.certificate.passed

    prefix = built.certificate.get("prefix_bound")
    assert prefix.achieved_value == pytest.approx(0.875)
    assert prefix.claimed_bound == pytest.approx(2 * np.sqrt(0.5 / 0.4))


def test_lemma1_negative_gamma_scales_coefficients():
    built = lemma1_construct(-2, 2, 0.4, AdicInterval(2, 1, 1))

    assert built.polynomial.indices.tolist() == [4, 5, 8, 9, 12, 13]
    assert np.allclose(np.abs(built.polynomial.coefficients), 1.0)
    assert built.certificate.get("l1_norm_upper").achieved_value == pytest.approx(1.5)
    assert built.certificate.passed


@pytest.mark.parametrize(
    "order,gamma,n0,eps,interval",
    [
        (3, 1 + 1j, 5, 0.3, (1, 2)),
        (4, -0.5, 17, 0.2, (2, 7)),
        (5, 2j, 3, 0.6, (1, 5)),
        (2, 3.0, 40, 0.05, (3, 8)),
    ],
)
def test_lemma1_certificates_pass(order, gamma, n0, eps, interval):
    built = lemma1_construct(gamma, n0, eps, AdicInterval(order, *interval))

    assert built.certificate.passed, [c.name for c in built.certificate.failures()]
    assert built.polynomial.indices[0] >= n0
    assert built.polynomial.max_index <= built.derived.n_max
    assert np.allclose(built.polynomial.magnitudes, abs(gamma) / order ** interval[0])


def test_lemma1_on_whole_interval_with_n0_not_a_power():
    """On [0, 1) the support starts at a^s = 2 < N0 = 3; only the rest is certified."""
    built = lemma1_construct(1, 3, 0.4, AdicInterval(2, 0, 1))

    assert built.polynomial.indices.tolist() == [2, 4, 6]
    min_index = built.certificate.get("min_index")
    assert not min_index.passed
    assert not min_index.asserted
    assert built.certificate.passed


def test_lemma1_respects_resolution_ceiling():
    with pytest.raises(ResolutionError) as excinfo:
        lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1), max_level=3)
    assert excinfo.value.required_level == 4


def test_step_approximation_of_two_values():
    f = StepFunction(2, 1, [0.2, 0.1])
    approx = step_approximate(f, 0.5, profile=BudgetProfile.RELAXED, min_level=0)

    assert [str(i) for i in approx.intervals] == ["1:1", "1:2"]
    assert approx.products == pytest.approx((0.1, 0.05))
    assert approx.residual == 0.0
    assert approx.budget == pytest.approx(0.5 * 0.15 / 4)


def test_step_approximation_splits_large_products():
    f = StepFunction.constant(2, 0, 0.9)
    approx = step_approximate(f, 0.5, profile=BudgetProfile.RELAXED, min_level=0)

    assert len(approx) == 4
    assert approx.products == pytest.approx((0.225,) * 4)
    assert np.allclose(approx.phi().values, 0.9)


def test_step_approximation_drops_small_mass():
    f = StepFunction(2, 1, [0.2, 1e-5])
    approx = step_approximate(f, 0.01, profile=BudgetProfile.RELAXED, min_level=0)

    assert [str(i) for i in approx.intervals] == ["1:1"]
    assert approx.dropped == 1
    assert approx.residual == pytest.approx(5e-6)


def test_lemma2_single_block():
    f = StepFunction(2, 1, [0.2, 0.0])
    built = lemma2_construct(f, 2, 0.5, profile=BudgetProfile.RELAXED)

    assert len(built.step_approx) == 1
    assert built.level == 4
    assert built.n_max == 13
    assert np.allclose(built.polynomial.magnitudes, 0.1)
    assert norm(built.g, 1) == pytest.approx(0.15)
    assert built.kept_set.measure == Fraction(7, 8)
    assert built.certificate.get("prefix_bound").achieved_value == pytest.approx(0.175)
    assert built.certificate.passed


def test_lemma2_two_blocks_chain_indices():
    f = StepFunction(2, 1, [0.2, 0.1])
    built = lemma2_construct(f, 2, 0.5, profile=BudgetProfile.RELAXED)

    plans = plan_blocks(built.step_approx, 2, 0.5)
    assert [(p.n0, p.derived.n_max) for p in plans] == [(2, 13), (14, 49)]
    assert built.polynomial.indices.tolist() == [4, 5, 8, 9, 12, 13, 16, 17, 32, 33, 48, 49]
    assert np.allclose(built.polynomial.magnitudes, [0.1] * 6 + [0.05] * 6)
    assert norm(built.g, 1) == pytest.approx(0.225)
    assert built.kept_set.measure == Fraction(3, 4)
    assert built.certificate.passed


def test_lemma2_g_agrees_with_f_on_kept_set():
    f = StepFunction(2, 1, [0.2, 0.1])
    built = lemma2_construct(f, 2, 0.5, profile=BudgetProfile.RELAXED)

    kept = built.kept_set.mask(built.level)
    assert np.allclose(built.g.values[kept], f.refine(built.level).values[kept])
    assert np.allclose(built.function.values, built.polynomial.evaluate(built.level).values)


def test_lemma2_magnitude_cap_is_honoured():
    f = StepFunction(2, 1, [0.2, 0.0])
    built = lemma2_construct(f, 2, 0.5, profile=BudgetProfile.RELAXED, magnitude_cap=0.06)

    assert built.polynomial.magnitudes.max() < 0.06
    assert built.certificate.passed


def test_lemma2_verbatim_constants_exceed_desk_resolution():
    f = sample_function(lambda x: x - 0.5, 2, 4)

    with pytest.raises((InfeasibleError, ResolutionError)):
        lemma2_construct(f, 2, 0.1)


def test_lemma2_rejects_zero_function():
    with pytest.raises(InvalidParameterError):
        lemma2_construct(StepFunction.zeros(2, 2), 2, 0.5)

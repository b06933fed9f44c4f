"""Tests for byte-stable JSON and CSV artifacts."""

import json

import numpy as np
import pytest

from walsh_greedy.adic import AdicInterval, StepFunction
from walsh_greedy.chrestenson import Spectrum
from walsh_greedy.config import BudgetProfile
from walsh_greedy.driver import correct_function
from walsh_greedy.errors import InvalidParameterError
from walsh_greedy.formats import (
    dumps_stable,
    format_float,
    load_certificate,
    load_spectrum,
    load_step_function,
    parse_interval,
    read_curve_csv,
    save_certificate,
    save_spectrum,
    save_step_function,
    write_curve_csv,
)
from walsh_greedy.greedy import CurvePoint
from walsh_greedy.lemmas import Lemma1Result, Lemma2Result, lemma1_construct, lemma2_construct
from walsh_greedy.verify import verify_certificate


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(2.0) == "2"
    assert format_float(float("inf")) == '"inf"'
    assert format_float(float("nan")) == '"nan"'


def test_dumps_stable_sorts_keys_and_indents():
    text = dumps_stable({"b": [1, 0.5], "a": {"flag": True, "none": None}})

    assert text == (
        "{\n"
        '  "a": {\n'
        '    "flag": true,\n'
        '    "none": null\n'
        "  },\n"
        '  "b": [\n'
        "    1,\n"
        "    0.5\n"
        "  ]\n"
        "}\n"
    )
    assert dumps_stable({}) == "{}\n"


def test_parse_interval():
    assert parse_interval("2:3", 3) == AdicInterval(3, 2, 3)
    with pytest.raises(InvalidParameterError):
        parse_interval("2-3", 3)
    with pytest.raises(InvalidParameterError):
        parse_interval("1:3", 2)


def test_step_function_file(tmp_path):
    path = tmp_path / "f.json"
    save_step_function(path, StepFunction(3, 1, [0.5, -1.0, 0.25]))
    data = json.loads(path.read_text(encoding="utf-8"))

    assert sorted(data) == ["level", "order", "values"]
    assert data["values"] == [[0.5, 0], [-1, 0], [0.25, 0]]
    loaded = load_step_function(path)
    assert loaded.order == 3
    assert np.array_equal(loaded.values, [0.5, -1.0, 0.25])


def test_complex_step_function_keeps_imaginary_part(tmp_path):
    path = tmp_path / "f.json"
    save_step_function(path, StepFunction(2, 1, [1j, 2.0]))

    assert np.array_equal(load_step_function(path).values, [1j, 2.0])


def test_hand_written_step_function_file(tmp_path):
    """Integer pairs written by hand load as complex cell values."""
    path = tmp_path / "f.json"
    path.write_text('{"order": 2, "level": 1, "values": [[1, 0], [0, -2]]}', encoding="utf-8")

    assert np.array_equal(load_step_function(path).values, [1.0, -2j])


def test_spectrum_file(tmp_path):
    path = tmp_path / "spec.json"
    save_spectrum(path, Spectrum.from_mapping(2, 3, {6: -1j, 1: 0.5}))
    data = json.loads(path.read_text(encoding="utf-8"))

    assert sorted(data) == ["coefficients", "order", "source_level"]
    assert data["coefficients"] == [{"im": 0, "n": 1, "re": 0.5}, {"im": -1, "n": 6, "re": 0}]
    loaded = load_spectrum(path)
    assert loaded.source_level == 3
    assert loaded.as_dict() == {1: 0.5, 6: -1j}


def test_spectrum_file_rejects_duplicate_index(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(
        '{"order": 2, "source_level": 2, "coefficients": [{"n": 1, "re": 1, "im": 0}, {"n": 1, "re": 2, "im": 0}]}',
        encoding="utf-8",
    )

    with pytest.raises(InvalidParameterError):
        load_spectrum(path)


def test_writes_are_byte_stable(tmp_path):
    built = lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1))
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    save_certificate(first, built)
    save_certificate(second, lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1)))

    assert first.read_bytes() == second.read_bytes()
    assert first.read_text(encoding="utf-8").endswith("}\n")


def test_lemma1_certificate_file(tmp_path):
    path = tmp_path / "cert.json"
    save_certificate(path, lemma1_construct(1, 2, 0.4, AdicInterval(2, 1, 1)))
    data = json.loads(path.read_text(encoding="utf-8"))

    assert data["kind"] == "lemma1"
    assert data["passed"] is True
    assert all("pass" in c for c in data["conclusions"])
    assert data["params"]["N"] == 13

    result, claimed = load_certificate(path)
    assert isinstance(result, Lemma1Result)
    assert result.polynomial.indices.tolist() == [4, 5, 8, 9, 12, 13]
    assert claimed.passed
    assert verify_certificate(result).passed


def test_lemma2_certificate_file(tmp_path):
    path = tmp_path / "cert.json"
    f = StepFunction(2, 1, [0.2, 0.1])
    save_certificate(path, lemma2_construct(f, 2, 0.5, profile=BudgetProfile.RELAXED))

    result, _ = load_certificate(path)
    assert isinstance(result, Lemma2Result)
    assert [str(i) for i in result.step_approx.intervals] == ["1:1", "1:2"]
    assert result.profile is BudgetProfile.RELAXED
    assert verify_certificate(result).passed


def test_correction_certificate_file(tmp_path):
    path = tmp_path / "cert.json"
    run = correct_function(StepFunction(2, 1, [0.2, 0.0]), 0.5, 1e-9, 4, profile=BudgetProfile.RELAXED)
    save_certificate(path, run)

    result, claimed = load_certificate(path)
    assert result.stop_reason == "converged"
    assert result.trace[0].block_range == (2, 4093)
    assert len(result.series) == 2046
    assert claimed.trace[0]["q"] == 1
    assert verify_certificate(result).passed


def test_curve_csv(tmp_path):
    path = tmp_path / "curve.csv"
    write_curve_csv(path, [CurvePoint(0, 1.5, 0.0), CurvePoint(1, 0.25, 1.0)])

    assert path.read_text(encoding="utf-8").splitlines()[0] == "m,error_p,partial_sum_norm_1"
    assert read_curve_csv(path) == [CurvePoint(0, 1.5, 0.0), CurvePoint(1, 0.25, 1.0)]

"""Tests for run configuration and budget profiles."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from walsh_greedy.config import (
    OUTPUT_DIR_ENV,
    BudgetProfile,
    RunConfig,
    check_level,
    default_max_level,
)
from walsh_greedy.errors import InvalidParameterError, ResolutionError


def test_budget_factors():
    assert BudgetProfile.VERBATIM.factor(1) == 4.0**-24
    assert BudgetProfile.RELAXED.factor(1) == 1 / 64
    assert BudgetProfile.RELAXED.factor(2) == 1 / 256
    with pytest.raises(InvalidParameterError):
        BudgetProfile.RELAXED.factor(0)


def test_default_max_level():
    assert default_max_level(2) == 20
    assert default_max_level(3) == 12
    assert default_max_level(5, max_cells=125) == 3


def test_check_level():
    check_level(2, 20, None)
    with pytest.raises(ResolutionError) as excinfo:
        check_level(2, 21, None, "lookup")
    assert excinfo.value.required_level == 21
    assert excinfo.value.max_level == 20


def test_run_config_defaults():
    config = RunConfig()

    assert config.order == 2
    assert config.max_level == 20
    assert config.budget_profile is BudgetProfile.VERBATIM


def test_run_config_rejects_level_above_cells():
    with pytest.raises(ValidationError):
        RunConfig(order=2, max_level=21)
    with pytest.raises(ValidationError):
        RunConfig(order=1)


def test_output_dir_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    config = RunConfig.from_env(order=3)

    assert config.max_level == 12
    assert config.output_path(Path("cert.json")) == tmp_path / "cert.json"
    assert config.output_path(tmp_path / "x.json") == tmp_path / "x.json"
    assert config.output_path(None) is None

"""Run configuration, resolution limits and budget profiles."""

from __future__ import annotations

import os
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from .errors import InvalidParameterError, ResolutionError

DEFAULT_MAX_CELLS = 1 << 20
OUTPUT_DIR_ENV = "WALSH_GREEDY_OUTPUT_DIR"


class BudgetProfile(str, Enum):
    """Geometric budget schedule of the correction driver."""

    VERBATIM = "verbatim"
    RELAXED = "relaxed"

    def factor(self, q: int) -> float:
        """Budget multiplier for step q (1-based)."""
        if q < 1:
            raise InvalidParameterError(f"step index must be >= 1, got {q}")
        exponent = 8 * (q + 2) if self is BudgetProfile.VERBATIM else q + 2
        return float(Fraction(1, 4**exponent))


def default_max_level(order: int, max_cells: int = DEFAULT_MAX_CELLS) -> int:
    """Largest J with order**J <= max_cells."""
    if order < 2:
        raise InvalidParameterError(f"order must be >= 2, got {order}")
    level = 0
    while order ** (level + 1) <= max_cells:
        level += 1
    return level


def resolve_max_level(order: int, max_level: Optional[int]) -> int:
    return default_max_level(order) if max_level is None else max_level


def check_level(order: int, level: int, max_level: Optional[int], what: str = "construction") -> None:
    """Raise ResolutionError when `level` exceeds the ceiling."""
    ceiling = resolve_max_level(order, max_level)
    if level > ceiling:
        raise ResolutionError(
            f"{what} needs level {level} but max_level is {ceiling} (order {order})",
            required_level=level,
            max_level=ceiling,
        )


class RunConfig(BaseModel):
    order: int = Field(2, ge=2)
    max_level: Optional[int] = Field(None, ge=1)
    max_cells: int = Field(DEFAULT_MAX_CELLS, ge=2)
    seed: int = 0
    budget_profile: BudgetProfile = BudgetProfile.VERBATIM
    eq_tol: float = Field(1e-10, gt=0)
    transform_tol: float = Field(1e-9, gt=0)
    zero_threshold: float = Field(1e-14, ge=0)
    naive_max_cells: int = Field(4096, ge=1)
    output_dir: Path = Path(".")

    @model_validator(mode="after")
    def _check_resolution(self) -> "RunConfig":
        if self.max_level is None:
            self.max_level = default_max_level(self.order, self.max_cells)
        if self.order**self.max_level > self.max_cells:
            raise ValueError(
                f"order**max_level = {self.order}**{self.max_level} exceeds max_cells={self.max_cells}"
            )
        return self

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """Build a config, letting the environment override the output directory only."""
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if env_dir:
            overrides["output_dir"] = Path(env_dir)
        return cls(**overrides)

    def output_path(self, name: Optional[Path]) -> Optional[Path]:
        """Resolve a relative artifact path against output_dir."""
        if name is None:
            return None
        return name if name.is_absolute() else self.output_dir / name

"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Optional


class WalshGreedyError(Exception):
    """Base class for every error raised by walsh_greedy."""


class InvalidParameterError(WalshGreedyError, ValueError):
    """A precondition on an argument does not hold."""


class PrecisionError(WalshGreedyError, ValueError):
    """A point cannot be represented exactly."""


class ResolutionError(WalshGreedyError, ValueError):
    """A construction needs a grid level outside the permitted range."""

    def __init__(
        self,
        message: str,
        *,
        required_level: Optional[int] = None,
        max_level: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.required_level = required_level
        self.max_level = max_level


class InfeasibleError(WalshGreedyError):
    """A budget cannot be met at the resolution ceiling."""

    def __init__(self, message: str, *, achieved_residual: Optional[float] = None) -> None:
        super().__init__(message)
        self.achieved_residual = achieved_residual

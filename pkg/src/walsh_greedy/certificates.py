"""Named, checkable conclusions and the certificates that collect them."""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

Number = Union[int, float, Fraction]
Relation = Literal["<", "<=", ">", ">=", "=="]
CertificateKind = Literal["lemma1", "lemma2", "correction", "step_approximation"]

_OPERATORS: Dict[str, Callable[[Any, Any], bool]] = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
}


@dataclass(frozen=True)
class Conclusion:
    """One claimed relation `achieved relation bound`."""

    name: str
    relation: Relation
    claimed_bound: float
    achieved_value: float
    passed: bool
    slack: float
    asserted: bool = True
    note: Optional[str] = None


def check(
    name: str,
    achieved: Number,
    relation: Relation,
    bound: Number,
    *,
    asserted: bool = True,
    note: Optional[str] = None,
) -> Conclusion:
    """Evaluate a relation exactly (int/Fraction/float compare without rounding)."""
    passed = bool(_OPERATORS[relation](achieved, bound))
    if relation in ("<", "<="):
        slack = float(bound) - float(achieved)
    elif relation in (">", ">="):
        slack = float(achieved) - float(bound)
    else:
        slack = -abs(float(achieved) - float(bound))
    return Conclusion(
        name=name,
        relation=relation,
        claimed_bound=float(bound),
        achieved_value=float(achieved),
        passed=passed,
        slack=slack,
        asserted=asserted,
        note=note,
    )


def within(name: str, deviation: float, tolerance: float, *, asserted: bool = True, note: Optional[str] = None) -> Conclusion:
    return check(name, deviation, "<=", tolerance, asserted=asserted, note=note)


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    conclusions: Tuple[Conclusion, ...]
    params: Dict[str, Any] = field(default_factory=dict)
    trace: Tuple[Dict[str, Any], ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conclusions if c.asserted)

    def failures(self) -> List[Conclusion]:
        return [c for c in self.conclusions if c.asserted and not c.passed]

    def get(self, name: str) -> Conclusion:
        for conclusion in self.conclusions:
            if conclusion.name == name:
                return conclusion
        raise KeyError(name)

    def names(self) -> Sequence[str]:
        return [c.name for c in self.conclusions]

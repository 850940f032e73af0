from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class VerifierRecord:
    """Outcome of one numeric inequality check ``lhs <= rhs + tolerance``."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool

    @classmethod
    def check(cls, name: str, lhs: float, rhs: float, tolerance: float) -> "VerifierRecord":
        lhs, rhs = float(lhs), float(rhs)
        return cls(name, lhs, rhs, float(tolerance), bool(lhs <= rhs + tolerance))

    @property
    def margin(self) -> float:
        return self.rhs + self.tolerance - self.lhs

from enum import StrEnum

from pandera.polars import DataFrameModel, Field
from pandera.typing.common import UInt64
from pydantic import BaseModel

REPORT_VERSION = "0.1.0"


class MatchType(StrEnum):
    """Parities of |M ∩ A| and |M ∩ B|, in that order."""

    EE = "EE"
    EO = "EO"
    OE = "OE"
    OO = "OO"

    @classmethod
    def from_parities(cls, a: int, b: int) -> "MatchType":
        return cls(("E", "O")[a % 2] + ("E", "O")[b % 2])

    @property
    def is_even(self) -> bool:
        return self is MatchType.EE

    def lower(self) -> "CycleType":
        return CycleType(self.value.lower())


class CycleType(StrEnum):
    """Parities of |U(C) ∩ A| and |U(C) ∩ B|, in that order."""

    EE = "ee"
    EO = "eo"
    OE = "oe"
    OO = "oo"

    @classmethod
    def from_parities(cls, a: int, b: int) -> "CycleType":
        return cls(("e", "o")[a % 2] + ("e", "o")[b % 2])

    def upper(self) -> MatchType:
        return MatchType(self.value.upper())


class CountTableRow(DataFrameModel):
    """One profile cell of a count table."""

    h: str  # space separated h-vector
    v: str  # space separated v-vector
    EE: UInt64 = Field(ge=0)
    EO: UInt64 = Field(ge=0)
    OE: UInt64 = Field(ge=0)
    OO: UInt64 = Field(ge=0)
    positive: bool  # all entries of h and v are positive

    class Config:
        coerce = True
        strict = True


class CheckResult(BaseModel):
    """Outcome of one named check over every matching of a run."""

    name: str
    passed: bool
    examined: int
    failures: int
    counterexample: str | None = None
    seconds: float | None = None


class CertificationReport(BaseModel):
    m: int
    n: int
    exhaustive: bool
    matchings: int
    layer_convention: str
    checks: list[CheckResult]
    observations: dict[str, str | int | bool | None] = {}
    version: str = REPORT_VERSION

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

"""Checker outcome models: counterexamples, verdicts and battery reports."""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from meanscope.models.estimates import AlphaReport


class Status(str, Enum):
    """Outcome of a single checker."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class Role(str, Enum):
    """How a checker's verdict enters the battery resolution."""

    NECESSARY = "necessary"
    EQUIVALENCE = "equivalence"
    VALIDATOR = "validator"
    AUXILIARY = "auxiliary"
    COMPARISON = "comparison"


class Resolution(str, Enum):
    """Agreed battery outcome."""

    SUBADDITIVE = "subadditive"
    NOT_SUBADDITIVE = "not_subadditive"
    DISAGREEMENT = "disagreement"
    INCONCLUSIVE = "inconclusive"


class Counterexample(BaseModel):
    """Witness of a significant violation of the inequality lhs <= rhs."""

    kind: str = Field(..., description="Which inequality was violated")
    witness: List[List[float]] = Field(..., description="Witness point tuple")
    labels: List[str] = Field(default_factory=list, description="Names of the witness parts")
    lhs: float
    rhs: float
    violation: float = Field(..., description="lhs - rhs")
    err_budget: float = Field(..., ge=0.0)
    sample_index: int = Field(default=-1, description="Index of the sample that produced it")

    @property
    def significant(self) -> bool:
        return self.violation > self.err_budget


class Verdict(BaseModel):
    """Outcome of one checker run."""

    id: str = Field(..., description="Checker identifier")
    role: Role
    status: Status
    min_margin: Optional[float] = Field(
        None,
        description=(
            "Smallest rhs - lhs over the samples, or rhs - lhs of a single-point finding;"
            " null when no such inequality was evaluated"
        ),
    )
    samples_run: int = Field(default=0, ge=0)
    counterexample: Optional[Counterexample] = None
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == Status.PASS

    @property
    def failed(self) -> bool:
        return self.status == Status.FAIL


class BatteryReport(BaseModel):
    """Per-checker verdicts plus the agreement resolution."""

    verdicts: List[Verdict] = Field(default_factory=list)
    alpha: AlphaReport
    resolution: Resolution
    details: Optional[str] = Field(None, description="Explanation of a disagreement")
    short_circuited: bool = False
    convexity_consistent: Optional[bool] = Field(
        None, description="Jensen-convexity and ratio-convexity agreement, when applicable"
    )

    def verdict(self, checker_id: str) -> Optional[Verdict]:
        for v in self.verdicts:
            if v.id == checker_id:
                return v
        return None

"""JSON report envelopes written by the CLI."""

import math
from typing import List, Optional, Union

from pydantic import BaseModel, Field, field_serializer

from meanscope.config.settings import RunConfig
from meanscope.models.estimates import AlphaReport, KinkReport
from meanscope.models.generator import Direction, Window
from meanscope.models.mean import MeanResult
from meanscope.models.verdict import Resolution, Verdict


class GeneratorInfo(BaseModel):
    """How a generator text was understood and bound to its window."""

    spec: str = Field(..., description="Normalized DSL text")
    direction: Direction
    canonicalized: bool
    window: Window
    requested_window: Optional[Window] = Field(
        None, description="Window asked for, when overflow clipping changed it"
    )


class AlphaInfo(BaseModel):
    """Compact alpha section of a report."""

    value: float
    pattern_ok: bool
    violations: List[float] = Field(default_factory=list)
    violation_count: int = 0

    @field_serializer("value")
    def _dump_value(self, v: float) -> Union[float, str]:
        return "inf" if math.isinf(v) else v

    @classmethod
    def from_report(cls, report: AlphaReport) -> "AlphaInfo":
        return cls(
            value=report.alpha,
            pattern_ok=report.pattern_ok,
            violations=report.violations,
            violation_count=report.violation_count,
        )


class Report(BaseModel):
    """Common envelope: resolved configuration and the generators involved."""

    config: RunConfig
    generator: GeneratorInfo


class MeanReport(Report):
    mean: MeanResult


class AlphaCommandReport(Report):
    alpha: AlphaInfo


class KinksReport(Report):
    kinks: List[KinkReport]


class CheckReport(Report):
    checkers: List[Verdict]


class CompareReport(Report):
    """Comparison of two means; ``generator`` is the left-hand one."""

    other: GeneratorInfo
    checkers: List[Verdict]


class BatteryCommandReport(Report):
    alpha: AlphaInfo
    checkers: List[Verdict]
    resolution: Resolution
    details: Optional[str] = None
    short_circuited: bool = False
    convexity_consistent: Optional[bool] = None


class ErrorInfo(BaseModel):
    type: str
    message: str
    position: Optional[int] = None
    witness: Optional[List[float]] = None


class ErrorReport(BaseModel):
    """Written instead of a report when a command cannot run."""

    error: ErrorInfo

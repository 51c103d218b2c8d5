"""Models for one-sided derivative estimates, kink reports and the alpha threshold."""

import math
from typing import List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from meanscope.models.generator import Side, Window


class SemiDerivEstimate(BaseModel):
    """One-sided derivative value with its Richardson error estimate."""

    model_config = ConfigDict(frozen=True)

    value: float
    side: Side
    order: Literal[1, 2]
    err_est: float = Field(..., ge=0.0, description="Absolute error bound")
    point: float = Field(..., gt=0.0)


class Kink(BaseModel):
    """A point where left and right derivatives of the given order differ."""

    model_config = ConfigDict(frozen=True)

    x: float
    left_value: float
    right_value: float
    order: Literal[1, 2]

    @property
    def jump(self) -> float:
        return self.right_value - self.left_value


class KinkReport(BaseModel):
    """Result of a kink scan."""

    points: List[Kink] = Field(default_factory=list)
    window: Window
    order: Literal[1, 2]

    @property
    def is_smooth(self) -> bool:
        return not self.points


def _float_or_inf(v: Union[float, str]) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValueError(f"unexpected alpha value {v!r}")
    return v


class AlphaReport(BaseModel):
    """Detected threshold where f''_+ turns from positive to identically zero."""

    alpha: float = Field(..., ge=0.0, description="0, a positive threshold, or inf")
    pattern_ok: bool
    violations: List[float] = Field(
        default_factory=list, description="Grid points breaking the sign pattern (first ones)"
    )
    violation_count: int = Field(default=0, ge=0)
    positive_count: int = Field(default=0, ge=0)
    zero_count: int = Field(default=0, ge=0)
    negative_count: int = Field(default=0, ge=0)
    window: Window

    @field_validator("alpha", mode="before")
    @classmethod
    def _parse_alpha(cls, v: Union[float, str]) -> float:
        return _float_or_inf(v)

    @field_serializer("alpha")
    def _dump_alpha(self, v: float) -> Union[float, str]:
        return "inf" if math.isinf(v) else v

    @property
    def unbounded(self) -> bool:
        """True when f''_+ stays positive on the whole window (alpha >= hi)."""
        return math.isinf(self.alpha)

    def describe(self) -> str:
        if self.unbounded:
            return f">= {self.window.hi:g}"
        return f"{self.alpha:.6g}"

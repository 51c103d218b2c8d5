"""Models for sample vectors and mean evaluations."""

import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SampleVector(BaseModel):
    """Ordered vector of n >= 1 positive reals."""

    model_config = ConfigDict(frozen=True)

    entries: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("entries")
    @classmethod
    def _positive(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(x) and x > 0.0 for x in v):
            raise ValueError("sample entries must be finite and strictly positive")
        return v

    @classmethod
    def of(cls, *values: float) -> "SampleVector":
        return cls(entries=tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.entries)


class MeanResult(BaseModel):
    """Value of a quasi-arithmetic mean with solver diagnostics."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., gt=0.0)
    solver_iters: int = Field(..., ge=0)
    residual: float = Field(..., ge=0.0, description="|f(value) - target|")
    target: float = Field(..., description="Arithmetic mean of the f-values")

"""Data models for meanscope."""

from meanscope.models.estimates import AlphaReport, Kink, KinkReport, SemiDerivEstimate
from meanscope.models.generator import (
    AffineSpec,
    Direction,
    ExpSpec,
    ExprSpec,
    Generator,
    LogSpec,
    PowerSpec,
    QuadLinSpec,
    Side,
    SplineSpec,
    Window,
)
from meanscope.models.mean import MeanResult, SampleVector
from meanscope.models.verdict import (
    BatteryReport,
    Counterexample,
    Resolution,
    Role,
    Status,
    Verdict,
)

__all__ = [
    "AffineSpec",
    "AlphaReport",
    "BatteryReport",
    "Counterexample",
    "Direction",
    "ExpSpec",
    "ExprSpec",
    "Generator",
    "Kink",
    "KinkReport",
    "LogSpec",
    "MeanResult",
    "PowerSpec",
    "QuadLinSpec",
    "Resolution",
    "Role",
    "SampleVector",
    "SemiDerivEstimate",
    "Side",
    "SplineSpec",
    "Status",
    "Verdict",
    "Window",
]

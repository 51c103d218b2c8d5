"""Generator-related data models: expression trees, specs, windows and built generators."""

import math
from enum import Enum
from typing import Annotated, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Direction(str, Enum):
    """Monotonicity direction of a generator on its window."""

    INCREASING = "inc"
    DECREASING = "dec"


class Side(str, Enum):
    """Side of a one-sided derivative."""

    LEFT = "left"
    RIGHT = "right"


class Window(BaseModel):
    """Finite analysis window [lo, hi] inside (0, inf)."""

    model_config = ConfigDict(frozen=True)

    lo: float = Field(..., description="Lower end, strictly positive")
    hi: float = Field(..., description="Upper end, finite and > lo")

    @model_validator(mode="after")
    def _check_bounds(self) -> "Window":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("window ends must be finite")
        if not 0.0 < self.lo < self.hi:
            raise ValueError("window must satisfy 0 < lo < hi")
        return self

    @classmethod
    def parse(cls, text: str) -> "Window":
        """Parse the CLI form ``lo:hi``."""
        lo_text, sep, hi_text = text.partition(":")
        if not sep:
            raise ValueError(f"window must look like lo:hi, got {text!r}")
        return cls(lo=float(lo_text), hi=float(hi_text))

    @property
    def geometric_mid(self) -> float:
        return math.sqrt(self.lo * self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __str__(self) -> str:
        return f"{self.lo!r}:{self.hi!r}"


# Expression trees ---------------------------------------------------------


class Const(BaseModel):
    """Real constant."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["const"] = "const"
    value: float


class Var(BaseModel):
    """The variable x."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["var"] = "var"


class BinOp(BaseModel):
    """Binary arithmetic node."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["binop"] = "binop"
    op: Literal["+", "-", "*", "/"]
    left: "ExprNode"
    right: "ExprNode"


class PowNode(BaseModel):
    """Power with a constant exponent."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["pow"] = "pow"
    base: "ExprNode"
    exponent: float


class Call(BaseModel):
    """Unary function application (ln or exp)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["call"] = "call"
    fn: Literal["ln", "exp"]
    arg: "ExprNode"


class Neg(BaseModel):
    """Unary negation."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["neg"] = "neg"
    arg: "ExprNode"


ExprNode = Annotated[Union[Const, Var, BinOp, PowNode, Call, Neg], Field(discriminator="kind")]

for _node in (BinOp, PowNode, Call, Neg):
    _node.model_rebuild()


# Generator specs ----------------------------------------------------------


def _nonzero(value: float, name: str) -> float:
    if value == 0.0 or not math.isfinite(value):
        raise ValueError(f"{name} must be finite and non-zero")
    return value


class PowerSpec(BaseModel):
    """x -> x^p (p != 0)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["power"] = "power"
    p: float

    @field_validator("p")
    @classmethod
    def _p_nonzero(cls, v: float) -> float:
        return _nonzero(v, "p")


class LogSpec(BaseModel):
    """x -> ln x."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["log"] = "log"


class ExpSpec(BaseModel):
    """x -> exp(c x) (c != 0)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["exp"] = "exp"
    c: float

    @field_validator("c")
    @classmethod
    def _c_nonzero(cls, v: float) -> float:
        return _nonzero(v, "c")


class QuadLinSpec(BaseModel):
    """x^2 on (0, alpha], tangent line 2 alpha x - alpha^2 beyond."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["quadlin"] = "quadlin"
    alpha: float

    @field_validator("alpha")
    @classmethod
    def _alpha_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError("alpha must be a positive real")
        return v


class SplineSpec(BaseModel):
    """Continuous piecewise quadratic.

    Piece i lives on [b_i, b_{i+1}] with b_0 = 0 and b_{m+1} = inf; there
    f(x) = v_i + s_i (x - b_i) + c_i/2 (x - b_i)^2 with v_0 = 0 and v_{i+1}
    equal to the value of piece i at b_{i+1}.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["spline"] = "spline"
    knots: Tuple[float, ...] = Field(..., description="Breakpoints b_1 < ... < b_m")
    slopes: Tuple[float, ...] = Field(..., description="Slope s_i at the left end of piece i")
    curvatures: Tuple[float, ...] = Field(..., description="Constant second derivative c_i")

    @model_validator(mode="after")
    def _check_shape(self) -> "SplineSpec":
        m = len(self.knots)
        if len(self.slopes) != m + 1 or len(self.curvatures) != m + 1:
            raise ValueError("spline needs len(knots) + 1 slopes and curvatures")
        values = self.knots + self.slopes + self.curvatures
        if not all(math.isfinite(v) for v in values):
            raise ValueError("spline parameters must be finite")
        if any(b <= 0.0 for b in self.knots):
            raise ValueError("spline knots must be positive")
        if any(b2 <= b1 for b1, b2 in zip(self.knots, self.knots[1:])):
            raise ValueError("spline knots must be strictly increasing")
        return self

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Left ends of all pieces, starting with 0."""
        return (0.0,) + self.knots

    def piece_values(self) -> Tuple[float, ...]:
        """Values v_i of f at the left end of each piece."""
        values = [0.0]
        starts = self.breakpoints
        for i, b_next in enumerate(self.knots):
            dx = b_next - starts[i]
            values.append(values[-1] + self.slopes[i] * dx + 0.5 * self.curvatures[i] * dx * dx)
        return tuple(values)


class ExprSpec(BaseModel):
    """Generator given by a DSL expression tree."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["expr"] = "expr"
    ast: ExprNode


class AffineSpec(BaseModel):
    """x -> a * inner(x) + b (a != 0)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["affine"] = "affine"
    a: float
    b: float = 0.0
    inner: "GeneratorSpec"

    @field_validator("a")
    @classmethod
    def _a_nonzero(cls, v: float) -> float:
        return _nonzero(v, "a")

    @field_validator("b")
    @classmethod
    def _b_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("b must be finite")
        return v


GeneratorSpec = Annotated[
    Union[PowerSpec, LogSpec, ExpSpec, QuadLinSpec, SplineSpec, ExprSpec, AffineSpec],
    Field(discriminator="kind"),
]

AffineSpec.model_rebuild()


class Generator(BaseModel):
    """A generator spec bound to an analysis window, with its monotonicity direction."""

    model_config = ConfigDict(frozen=True)

    spec: GeneratorSpec = Field(..., description="The function f")
    window: Window = Field(..., description="Analysis window (after any overflow clipping)")
    direction: Direction = Field(..., description="Sampled monotonicity direction")
    analytic: bool = Field(default=True, description="Use closed-form derivatives when known")
    requested_window: Optional[Window] = Field(
        None, description="Window asked for, when clipping changed it"
    )
    canonicalized: bool = Field(default=False, description="Negated to make f increasing")

    @property
    def lo(self) -> float:
        return self.window.lo

    @property
    def hi(self) -> float:
        return self.window.hi

    @property
    def clipped(self) -> bool:
        return self.requested_window is not None and self.requested_window != self.window

"""Exception hierarchy for meanscope.

Mathematical outcomes (failed inequalities, broken sign patterns, checker
disagreements) are reported as data. Exceptions are reserved for inputs that
cannot be analysed at all.
"""

from typing import Optional


class MeanscopeError(Exception):
    """Base class for all meanscope errors."""

    def to_dict(self) -> dict:
        """Structured form used by the CLI diagnostics."""
        return {"type": type(self).__name__, "message": str(self)}


class GeneratorSyntaxError(MeanscopeError):
    """Generator text does not conform to the DSL grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.reason = message
        self.position = position

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["position"] = self.position
        return data


class UnknownIdentifierError(GeneratorSyntaxError):
    """An identifier that is neither a builtin nor a DSL function."""


class NonConstantExponentError(GeneratorSyntaxError):
    """The right operand of ``^`` does not fold to a constant."""


class EvaluationError(MeanscopeError):
    """f cannot be evaluated at a point (division by zero, log of a non-positive value...)."""

    def __init__(self, reason: str, x: Optional[float] = None):
        where = f" at x={x!r}" if x is not None else ""
        super().__init__(f"{reason}{where}")
        self.reason = reason
        self.x = x


class DomainError(EvaluationError):
    """Evaluation requested outside the analysis window."""


class GeneratorConstructionError(MeanscopeError):
    """A generator spec cannot be turned into a usable Generator."""


class WindowError(GeneratorConstructionError):
    """The analysis window is not a finite sub-interval of (0, inf)."""


class MonotonicityViolation(GeneratorConstructionError):
    """Sampled values of f are not strictly monotone on the window."""

    def __init__(self, x1: float, x2: float, f1: float, f2: float):
        super().__init__(
            f"f is not strictly monotone: f({x1:.6g})={f1:.6g}, f({x2:.6g})={f2:.6g}"
        )
        self.x1 = x1
        self.x2 = x2
        self.f1 = f1
        self.f2 = f2

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["witness"] = [self.x1, self.x2]
        return data


class StepUnderflowError(MeanscopeError):
    """No room for the difference-step schedule on the requested side."""

    def __init__(self, x: float, side: str):
        super().__init__(f"no room for one-sided differences at x={x!r} ({side})")
        self.x = x
        self.side = side


class RangeError(MeanscopeError):
    """Inversion target lies outside f(window)."""

    def __init__(self, y: float, lo_value: float, hi_value: float):
        super().__init__(f"value {y!r} outside the image [{lo_value!r}, {hi_value!r}]")
        self.y = y
        self.lo_value = lo_value
        self.hi_value = hi_value

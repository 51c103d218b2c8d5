"""Generator construction, evaluation, closed-form derivatives and canonicalization."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from meanscope.config.settings import DEFAULT_WINDOW, MONOTONE_GRID_POINTS
from meanscope.core.expr import derivative_trees, evaluate_expr
from meanscope.models.errors import (
    DomainError,
    EvaluationError,
    MonotonicityViolation,
    WindowError,
)
from meanscope.models.generator import (
    AffineSpec,
    Direction,
    ExpSpec,
    ExprSpec,
    Generator,
    GeneratorSpec,
    LogSpec,
    PowerSpec,
    QuadLinSpec,
    Side,
    SplineSpec,
    Window,
)
from meanscope.utils.sampling import log_grid, log_uniform, stream

logger = logging.getLogger(__name__)

# Tails of the window where |f| leaves [F_MIN, F_MAX] are clipped away.
F_MAX = 1e150
F_MIN = 1e-150
RANDOM_PAIRS = 10_000
_MONOTONE_STREAM = "build.monotone"


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


# Raw evaluation ---------------------------------------------------------------


def _spline_piece(spec: SplineSpec, x: np.ndarray, side: Side) -> np.ndarray:
    knots = np.asarray(spec.knots, dtype=float)
    which = "right" if side == Side.RIGHT else "left"
    return np.searchsorted(knots, x, side=which)


def values(spec: GeneratorSpec, x) -> np.ndarray:
    """f(x) elementwise, without any window check."""
    x = _arr(x)
    if isinstance(spec, PowerSpec):
        with np.errstate(over="ignore"):
            return np.power(x, spec.p)
    if isinstance(spec, LogSpec):
        return np.log(x)
    if isinstance(spec, ExpSpec):
        with np.errstate(over="ignore"):
            return np.exp(spec.c * x)
    if isinstance(spec, QuadLinSpec):
        a = spec.alpha
        return np.where(x <= a, x * x, 2.0 * a * x - a * a)
    if isinstance(spec, SplineSpec):
        i = _spline_piece(spec, x, Side.RIGHT)
        start = np.asarray(spec.breakpoints)[i]
        t = x - start
        v = np.asarray(spec.piece_values())[i]
        s = np.asarray(spec.slopes)[i]
        c = np.asarray(spec.curvatures)[i]
        return v + s * t + 0.5 * c * t * t
    if isinstance(spec, AffineSpec):
        with np.errstate(over="ignore", invalid="ignore"):
            return spec.a * values(spec.inner, x) + spec.b
    return evaluate_expr(spec.ast, x)


def difference(spec: GeneratorSpec, x, y) -> np.ndarray:
    """f(x) - f(y) with affine offsets cancelled exactly."""
    if isinstance(spec, AffineSpec):
        return spec.a * difference(spec.inner, x, y)
    return values(spec, x) - values(spec, y)


def split_affine(spec: GeneratorSpec) -> Tuple[float, float, GeneratorSpec]:
    """(a, b, inner) with f = a * inner + b and inner not affine."""
    a, b = 1.0, 0.0
    while isinstance(spec, AffineSpec):
        b += a * spec.b
        a *= spec.a
        spec = spec.inner
    return a, b, spec


def analytic_derivative(spec: GeneratorSpec, x, order: int, side: Side = Side.RIGHT) -> np.ndarray:
    """Closed-form one-sided derivative of the given order (1 or 2)."""
    x = _arr(x)
    if isinstance(spec, PowerSpec):
        p = spec.p
        with np.errstate(over="ignore"):
            if order == 1:
                return p * np.power(x, p - 1.0)
            return p * (p - 1.0) * np.power(x, p - 2.0)
    if isinstance(spec, LogSpec):
        return 1.0 / x if order == 1 else -1.0 / (x * x)
    if isinstance(spec, ExpSpec):
        with np.errstate(over="ignore"):
            return spec.c**order * np.exp(spec.c * x)
    if isinstance(spec, QuadLinSpec):
        a = spec.alpha
        if order == 1:
            return np.where(x <= a, 2.0 * x, 2.0 * a)
        inside = x <= a if side == Side.LEFT else x < a
        return np.where(inside, 2.0, 0.0)
    if isinstance(spec, SplineSpec):
        i = _spline_piece(spec, x, side)
        c = np.asarray(spec.curvatures)[i]
        if order == 2:
            return c.astype(float)
        start = np.asarray(spec.breakpoints)[i]
        s = np.asarray(spec.slopes)[i]
        return s + c * (x - start)
    if isinstance(spec, AffineSpec):
        return spec.a * analytic_derivative(spec.inner, x, order, side)
    d1, d2 = derivative_trees(spec.ast)
    return evaluate_expr(d1 if order == 1 else d2, x)


def kink_points(spec: GeneratorSpec, order: int) -> Tuple[float, ...]:
    """Points where the closed-form derivative of ``order`` has different one-sided values."""
    if isinstance(spec, QuadLinSpec):
        return (spec.alpha,) if order == 2 else ()
    if isinstance(spec, SplineSpec):
        kinks = []
        starts = spec.breakpoints
        for i, b in enumerate(spec.knots):
            left_slope = spec.slopes[i] + spec.curvatures[i] * (b - starts[i])
            jump1 = not math.isclose(left_slope, spec.slopes[i + 1], rel_tol=1e-12, abs_tol=1e-300)
            jump2 = spec.curvatures[i] != spec.curvatures[i + 1]
            if jump1 or (order == 2 and jump2):
                kinks.append(b)
        return tuple(kinks)
    if isinstance(spec, AffineSpec):
        return kink_points(spec.inner, order)
    return ()


# Build ------------------------------------------------------------------------


def _usable(spec: GeneratorSpec, x: float) -> bool:
    try:
        v = float(values(spec, np.array([x]))[0])
    except EvaluationError:
        return False
    return math.isfinite(v) and F_MIN <= abs(v) <= F_MAX


def _boundary(spec: GeneratorSpec, good: float, bad: float) -> float:
    """Last usable point between a usable and an unusable point (geometric bisection)."""
    for _ in range(80):
        mid = math.sqrt(good * bad)
        if mid in (good, bad):
            break
        if _usable(spec, mid):
            good = mid
        else:
            bad = mid
    return good


def _clip_to_finite(spec: GeneratorSpec, window: Window, points: int) -> Window:
    grid = log_grid(window.lo, window.hi, points)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = values(spec, grid)
    finite = np.isfinite(vals) & (np.abs(vals) <= F_MAX)
    # tiny values are only a problem on a tail (underflow); inside they are zero crossings
    ok = finite & (np.abs(vals) >= F_MIN)
    if ok.all():
        return window
    good = np.flatnonzero(ok)
    if good.size == 0:
        raise EvaluationError("f is not representable anywhere on the window")
    first, last = int(good[0]), int(good[-1])
    if first == 0 and last == len(grid) - 1:
        return window
    if not finite[first : last + 1].all():
        bad = first + int(np.flatnonzero(~finite[first : last + 1])[0])
        raise EvaluationError("f is not finite inside the window", float(grid[bad]))
    lo = window.lo if first == 0 else _boundary(spec, float(grid[first]), float(grid[first - 1]))
    hi = window.hi if last == len(grid) - 1 else _boundary(spec, float(grid[last]), float(grid[last + 1]))
    if not lo < hi:
        raise EvaluationError("f is finite only on a degenerate part of the window")
    clipped = Window(lo=lo, hi=hi)
    logger.warning(
        "Clipped window %s to %s: |f| leaves [%.0e, %.0e] outside", window, clipped, F_MIN, F_MAX
    )
    return clipped


def _direction(inner: GeneratorSpec, scale: float, window: Window, points: int) -> Direction:
    """Direction of f = scale * inner + b, certified on ``inner`` so that b and |scale| cost no digits."""
    unit = math.copysign(1.0, scale)
    grid = log_grid(window.lo, window.hi, points)
    vals = unit * values(inner, grid)
    signs = np.sign(np.diff(vals))
    reference = signs[0]
    bad = np.flatnonzero(signs != reference) if reference != 0 else np.array([0])
    if bad.size:
        k = int(bad[0])
        f1, f2 = abs(scale) * vals[k], abs(scale) * vals[k + 1]
        raise MonotonicityViolation(float(grid[k]), float(grid[k + 1]), float(f1), float(f2))
    direction = Direction.INCREASING if reference > 0 else Direction.DECREASING

    rng = stream(0, _MONOTONE_STREAM, 0)
    pairs = np.sort(log_uniform(rng, window.lo, window.hi, (RANDOM_PAIRS, 2)), axis=1)
    f1 = unit * values(inner, pairs[:, 0])
    f2 = unit * values(inner, pairs[:, 1])
    distinct = pairs[:, 1] > pairs[:, 0]
    wrong = distinct & (reference * (f2 - f1) < 0.0)
    if wrong.any():
        k = int(np.flatnonzero(wrong)[0])
        raise MonotonicityViolation(
            float(pairs[k, 0]), float(pairs[k, 1]), float(abs(scale) * f1[k]), float(abs(scale) * f2[k])
        )
    return direction


def build(
    spec: GeneratorSpec,
    window: Optional[Window] = None,
    *,
    analytic: bool = True,
    monotone_points: int = MONOTONE_GRID_POINTS,
) -> Generator:
    """Bind ``spec`` to a window, certify strict monotonicity by sampling and fix its direction.

    Raises:
        WindowError: if the window is not a finite sub-interval of (0, inf)
        EvaluationError: if f cannot be evaluated inside the window
        MonotonicityViolation: if sampled values are not strictly monotone
    """
    window = window or DEFAULT_WINDOW
    if not (0.0 < window.lo < window.hi and math.isfinite(window.hi)):
        raise WindowError(f"invalid window {window}")
    scale, _, inner = split_affine(spec)
    effective = _clip_to_finite(inner, window, monotone_points)
    direction = _direction(inner, scale, effective, monotone_points)
    logger.debug("Built %s on %s: %s", spec.kind, effective, direction.value)
    return Generator(
        spec=spec,
        window=effective,
        direction=direction,
        analytic=analytic,
        requested_window=window if effective != window else None,
    )


def evaluate(g: Generator, x: float) -> float:
    """f(x) for x inside the window."""
    if not g.window.contains(x):
        raise DomainError(f"point outside window {g.window}", x)
    return float(values(g.spec, np.array([x]))[0])


def _negate(spec: GeneratorSpec) -> GeneratorSpec:
    if isinstance(spec, AffineSpec):
        if spec.a == -1.0 and spec.b == 0.0:
            return spec.inner
        return AffineSpec(a=-spec.a, b=-spec.b, inner=spec.inner)
    return AffineSpec(a=-1.0, b=0.0, inner=spec)


def canonicalize(g: Generator) -> Generator:
    """Increasing generator inducing the same mean (f -> -f for decreasing f)."""
    if g.direction == Direction.INCREASING:
        return g
    return g.model_copy(
        update={
            "spec": _negate(g.spec),
            "direction": Direction.INCREASING,
            "canonicalized": True,
        }
    )

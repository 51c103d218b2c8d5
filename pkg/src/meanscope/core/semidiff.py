"""One-sided derivative estimates, kink detection and the alpha threshold.

Numerical estimates use one-sided divided differences on a halving step
schedule, accelerated by a Ridders/Richardson tableau. Closed-form derivatives
are used wherever they exist and the point is not a kink of the requested
order.
"""

import logging
import math
from typing import Callable, List, NamedTuple, Tuple

import numpy as np

from meanscope.config.settings import SCAN_GRID_POINTS
from meanscope.core.generators import analytic_derivative, kink_points, split_affine, values
from meanscope.models.errors import DomainError, StepUnderflowError
from meanscope.models.estimates import AlphaReport, Kink, KinkReport, SemiDerivEstimate
from meanscope.models.generator import Generator, Side
from meanscope.utils.sampling import log_grid

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)

LEVELS = 7
STEP_SCALE = 1e-3
STEP_FLOOR = 1e-10
SAFE = 2.0
NESTED_INFLATION = 10.0

KINK_TOL = 1e-3
REFINE_REL = 1e-8
ALPHA_ZERO_RATIO = 1e-6
ALPHA_REL_TOL = 1e-6
MAX_VIOLATIONS = 32

Estimate = Tuple[np.ndarray, np.ndarray]


def _arr(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def near_any(xs: np.ndarray, kinks: Tuple[float, ...]) -> np.ndarray:
    mask = np.zeros(xs.shape, dtype=bool)
    for k in kinks:
        mask |= np.abs(xs - k) <= 1e-12 * max(1.0, k)
    return mask


def _analytic_err(v: np.ndarray) -> np.ndarray:
    return 4.0 * EPS * (1.0 + np.abs(v))


# Richardson tableau ----------------------------------------------------------


def richardson(quotient: Callable[[np.ndarray], np.ndarray], h0: np.ndarray) -> Estimate:
    """
    Ridders extrapolation of one-sided difference quotients, elementwise.

    ``quotient(h)`` must have an error expansion in integer powers of h. The
    step halves at each level; the estimate with the smallest tableau error is
    kept, and an element stops improving once a higher order is worse by SAFE.

    Returns:
        (values, err_est) arrays
    """
    previous = [quotient(h0)]
    result = previous[0].copy()
    err = np.full(result.shape, np.inf)
    active = np.ones(result.shape, dtype=bool)
    h = h0
    for i in range(1, LEVELS):
        h = h / 2.0
        row = [quotient(h)]
        fac = 2.0
        for j in range(1, i + 1):
            extrapolated = (row[j - 1] * fac - previous[j - 1]) / (fac - 1.0)
            fac *= 2.0
            row.append(extrapolated)
            errt = np.maximum(
                np.abs(extrapolated - row[j - 1]), np.abs(extrapolated - previous[j - 1])
            )
            better = active & (errt <= err)
            result = np.where(better, extrapolated, result)
            err = np.where(better, errt, err)
        active &= ~(np.abs(row[i] - previous[i - 1]) >= SAFE * err)
        previous = row
    err = np.where(np.isfinite(err), err, np.abs(result))
    return result, np.maximum(err, _analytic_err(result))


def initial_steps(g: Generator, xs: np.ndarray, side: Side, reach: int) -> np.ndarray:
    """h0 = 1e-3 max(1, x), capped at 0.1 x and at the room on ``side`` (reach steps)."""
    if ((xs < g.lo) | (xs > g.hi)).any():
        bad = xs[(xs < g.lo) | (xs > g.hi)]
        raise DomainError(f"point outside window {g.window}", float(bad[0]))
    tiny = ~has_room(g, xs, side, reach)
    if tiny.any():
        raise StepUnderflowError(float(xs[tiny][0]), side.value)
    room = g.hi - xs if side == Side.RIGHT else xs - g.lo
    return np.minimum(np.minimum(STEP_SCALE * np.maximum(1.0, xs), 0.1 * xs), room / reach)


def has_room(g: Generator, xs: np.ndarray, side: Side, reach: int) -> np.ndarray:
    """Points where initial_steps would not underflow."""
    room = g.hi - xs if side == Side.RIGHT else xs - g.lo
    h0 = np.minimum(np.minimum(STEP_SCALE * np.maximum(1.0, xs), 0.1 * xs), room / reach)
    return h0 >= STEP_FLOOR * np.maximum(1.0, xs)


def _first_quotients(fn, xs: np.ndarray, side: Side):
    sign = 1.0 if side == Side.RIGHT else -1.0
    base = fn(xs)

    def quotient(h: np.ndarray) -> np.ndarray:
        return (fn(xs + sign * h) - base) / (sign * h)

    return quotient


def _second_quotients(fn, xs: np.ndarray, side: Side):
    sign = 1.0 if side == Side.RIGHT else -1.0
    base = fn(xs)

    def quotient(h: np.ndarray) -> np.ndarray:
        return (fn(xs + 2.0 * sign * h) - 2.0 * fn(xs + sign * h) + base) / (h * h)

    return quotient


# Vectorized estimates ---------------------------------------------------------


def d1_values(g: Generator, xs, side: Side = Side.RIGHT) -> Estimate:
    """f'_side at every point of ``xs`` as (values, err_est)."""
    xs = _arr(xs)
    scale, _, spec = split_affine(g.spec)
    out = np.empty_like(xs)
    err = np.empty_like(xs)
    if g.analytic:
        numeric = near_any(xs, kink_points(spec, 1))
    else:
        numeric = np.ones(xs.shape, dtype=bool)
    smooth = ~numeric
    if smooth.any():
        v = analytic_derivative(spec, xs[smooth], 1, side)
        out[smooth] = v
        err[smooth] = _analytic_err(v)
    if numeric.any():
        pts = xs[numeric]
        h0 = initial_steps(g, pts, side, reach=1)
        v, e = richardson(_first_quotients(lambda t: values(spec, t), pts, side), h0)
        out[numeric] = v
        err[numeric] = e
    return scale * out, abs(scale) * err


def d2_values(g: Generator, xs, side: Side = Side.RIGHT) -> Estimate:
    """f''_side at every point of ``xs`` as (values, err_est)."""
    xs = _arr(xs)
    scale, _, spec = split_affine(g.spec)
    out = np.empty_like(xs)
    err = np.empty_like(xs)
    if g.analytic:
        kinked = near_any(xs, kink_points(spec, 2))
        smooth = ~kinked
        if smooth.any():
            v = analytic_derivative(spec, xs[smooth], 2, side)
            out[smooth] = v
            err[smooth] = _analytic_err(v)
        if kinked.any():
            pts = xs[kinked]
            h0 = initial_steps(g, pts, side, reach=1)
            d1 = lambda t: analytic_derivative(spec, t, 1, side)  # noqa: E731
            v, e = richardson(_first_quotients(d1, pts, side), h0)
            out[kinked] = v
            err[kinked] = e
    else:
        h0 = initial_steps(g, xs, side, reach=2)
        v, e = richardson(_second_quotients(lambda t: values(spec, t), xs, side), h0)
        out[:] = v
        err[:] = NESTED_INFLATION * e
    return scale * out, abs(scale) * err


def _scalar(g: Generator, x: float, side: Side, order: int) -> SemiDerivEstimate:
    if not g.window.contains(x):
        raise DomainError(f"point outside window {g.window}", x)
    fn = d1_values if order == 1 else d2_values
    v, e = fn(g, [x], side)
    return SemiDerivEstimate(value=float(v[0]), side=side, order=order, err_est=float(e[0]), point=x)


def d1_side(g: Generator, x: float, side: Side = Side.RIGHT) -> SemiDerivEstimate:
    """
    One-sided first derivative f'_side(x).

    Raises:
        DomainError: if x is outside the window
        StepUnderflowError: if there is no room for the step schedule
    """
    return _scalar(g, x, side, 1)


def d2_side(g: Generator, x: float, side: Side = Side.RIGHT) -> SemiDerivEstimate:
    """One-sided second derivative f''_side(x) = (f')'_side(x)."""
    return _scalar(g, x, side, 2)


def scan_values(g: Generator, xs, order: int, side: Side = Side.RIGHT) -> Estimate:
    """Derivatives from ``side`` on a grid, using the other side where there is no room."""
    xs = _arr(xs)
    need = 1 if order == 1 or g.analytic else 2
    room = g.hi - xs if side == Side.RIGHT else xs - g.lo
    steps = np.minimum(np.minimum(STEP_SCALE * np.maximum(1.0, xs), 0.1 * xs), room / need)
    preferred = steps >= 1e3 * STEP_FLOOR * np.maximum(1.0, xs)
    other = Side.LEFT if side == Side.RIGHT else Side.RIGHT
    fn = d1_values if order == 1 else d2_values
    out = np.empty_like(xs)
    err = np.empty_like(xs)
    if preferred.any():
        out[preferred], err[preferred] = fn(g, xs[preferred], side)
    if (~preferred).any():
        out[~preferred], err[~preferred] = fn(g, xs[~preferred], other)
    return out, err


# Kinks ------------------------------------------------------------------------
#
# A cell [a, b] is judged by the left estimate at a against the right estimate
# at b. Both stencils point away from the cell, so a kink inside it is never
# under either of them and the mismatch tends to the jump as the cell shrinks.


class _Sides(NamedTuple):
    """Left and right estimates of one derivative order at a set of points."""

    left: np.ndarray
    left_err: np.ndarray
    right: np.ndarray
    right_err: np.ndarray

    @classmethod
    def at(cls, g: Generator, xs: np.ndarray, order: int) -> "_Sides":
        left, left_err = scan_values(g, xs, order, Side.LEFT)
        right, right_err = scan_values(g, xs, order, Side.RIGHT)
        return cls(left, left_err, right, right_err)

    def take(self, idx: np.ndarray) -> "_Sides":
        return _Sides(*(field[idx] for field in self))

    @staticmethod
    def choose(pick: np.ndarray, parts: List["_Sides"]) -> "_Sides":
        return _Sides(*(np.choose(pick, fields) for fields in zip(*parts)))


def _mismatch(at_a: _Sides, at_b: _Sides) -> Estimate:
    """right(b) - left(a) with the summed error estimates."""
    return at_b.right - at_a.left, at_b.right_err + at_a.left_err


def _flag_cells(grid: np.ndarray, sides: _Sides) -> np.ndarray:
    """Cells whose mismatch departs from the width-scaled mismatch of their neighbours."""
    jumps, errs = _mismatch(sides.take(slice(None, -1)), sides.take(slice(1, None)))
    widths = np.diff(grid)
    rates = jumps / widths
    expected = np.empty_like(jumps)
    expected[1:-1] = 0.5 * (rates[:-2] + rates[2:]) * widths[1:-1]
    expected[0] = rates[1] * widths[0]
    expected[-1] = rates[-2] * widths[-1]
    scale = 1.0 + np.abs(sides.left[:-1]) + np.abs(sides.right[1:])
    return np.flatnonzero(np.abs(jumps - expected) > KINK_TOL * scale + errs)


def _refine(g: Generator, order: int, a: np.ndarray, b: np.ndarray, at_a: _Sides, at_b: _Sides):
    """
    Trisect all flagged cells together down to a width of 1e-8 relative.

    The kept third is the one whose mismatch stands furthest above its error
    estimate.
    """
    for _ in range(60):
        wide = (b - a) > REFINE_REL * np.maximum(1.0, a)
        if not wide.any():
            break
        w = b - a
        t1 = a + w / 3.0
        t2 = a + 2.0 * w / 3.0
        at_t1 = _Sides.at(g, t1, order)
        at_t2 = _Sides.at(g, t2, order)
        scores = []
        for lo_end, hi_end in ((at_a, at_t1), (at_t1, at_t2), (at_t2, at_b)):
            jump, err = _mismatch(lo_end, hi_end)
            scores.append(np.abs(jump) - err)
        pick = np.where(wide, np.argmax(np.stack(scores), axis=0), 3)
        a = np.choose(pick, [a, t1, t2, a])
        b = np.choose(pick, [t1, t2, b, b])
        at_a, at_b = (
            _Sides.choose(pick, [at_a, at_t1, at_t2, at_a]),
            _Sides.choose(pick, [at_t1, at_t2, at_b, at_b]),
        )
    return a, b, at_a, at_b


def detect_kinks(g: Generator, order: int = 1, points: int = SCAN_GRID_POINTS) -> KinkReport:
    """
    Scan a log grid for jumps of the derivative of ``order`` and localize them.

    Left and right estimates are taken at every grid point. Cells whose
    mismatch the neighbouring cells cannot explain are trisected, and a kink
    is reported when the final left and right values differ by more than
    KINK_TOL (1 + |left| + |right|) plus their error estimates. Kinks closer
    than one grid cell are merged, keeping the clearest.
    """
    grid = log_grid(g.lo, g.hi, points)
    sides = _Sides.at(g, grid, order)
    cells = _flag_cells(grid, sides)
    if cells.size == 0:
        return KinkReport(points=[], window=g.window, order=order)
    logger.debug("Refining %d candidate cells (order %d)", cells.size, order)
    a, b, at_a, at_b = _refine(
        g, order, grid[cells], grid[cells + 1], sides.take(cells), sides.take(cells + 1)
    )

    left, right = at_a.left, at_b.right
    jump, noise = _mismatch(at_a, at_b)
    clearance = np.abs(jump) - KINK_TOL * (1.0 + np.abs(left) + np.abs(right)) - noise
    mid = 0.5 * (a + b)
    merge_rel = grid[1] / grid[0] - 1.0

    kinks: List[Kink] = []
    best: List[float] = []
    for i in np.flatnonzero(clearance > 0.0):
        kink = Kink(
            x=float(mid[i]), left_value=float(left[i]), right_value=float(right[i]), order=order
        )
        if kinks and kink.x - kinks[-1].x <= merge_rel * kink.x:
            if clearance[i] > best[-1]:
                kinks[-1], best[-1] = kink, float(clearance[i])
            continue
        kinks.append(kink)
        best.append(float(clearance[i]))
    return KinkReport(points=kinks, window=g.window, order=order)


# Alpha threshold -------------------------------------------------------------

_POSITIVE, _ZERO, _NEGATIVE = 1, 0, -1


def curvature_classes(g: Generator, xs: np.ndarray) -> np.ndarray:
    """Sign class of f''_+ with the scale-free zero test |f''_+| x / f' <= 1e-6."""
    d2, err = scan_values(g, xs, 2)
    d1, _ = scan_values(g, xs, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(d2) * xs / np.abs(d1)
    zero = (ratio <= ALPHA_ZERO_RATIO) | (np.abs(d2) <= err)
    return np.where(zero, _ZERO, np.where(d2 > 0.0, _POSITIVE, _NEGATIVE))


def _bisect_transition(g: Generator, positive: float, zero: float) -> float:
    while zero - positive > ALPHA_REL_TOL * zero:
        mid = math.sqrt(positive * zero)
        if mid in (positive, zero):
            break
        if curvature_classes(g, np.array([mid]))[0] == _POSITIVE:
            positive = mid
        else:
            zero = mid
    return zero


def find_alpha(g: Generator, points: int = SCAN_GRID_POINTS) -> AlphaReport:
    """
    Locate where f''_+ turns from positive to identically zero.

    alpha is 0 when f''_+ vanishes on the whole grid and inf when it stays
    positive. A negative point or a positive point after a zero breaks the
    pattern; such points are listed as violations.
    """
    grid = log_grid(g.lo, g.hi, points)
    classes = curvature_classes(g, grid)
    counts = {
        "positive_count": int((classes == _POSITIVE).sum()),
        "zero_count": int((classes == _ZERO).sum()),
        "negative_count": int((classes == _NEGATIVE).sum()),
    }
    non_positive = np.flatnonzero(classes != _POSITIVE)
    prefix = int(non_positive[0]) if non_positive.size else len(grid)

    negative = classes == _NEGATIVE
    reentry = np.zeros_like(negative)
    reentry[prefix:] = classes[prefix:] == _POSITIVE
    broken = negative | reentry
    bad = grid[broken]

    if bad.size:
        alpha = 0.0 if prefix == 0 else float(grid[prefix])
        logger.debug("Sign pattern of f''_+ broken at %d grid points", bad.size)
        return AlphaReport(
            alpha=alpha,
            pattern_ok=False,
            violations=[float(x) for x in bad[:MAX_VIOLATIONS]],
            violation_count=int(bad.size),
            window=g.window,
            **counts,
        )
    if prefix == 0:
        alpha = 0.0
    elif prefix == len(grid):
        alpha = math.inf
    else:
        alpha = _bisect_transition(g, float(grid[prefix - 1]), float(grid[prefix]))
    return AlphaReport(alpha=alpha, pattern_ok=True, window=g.window, **counts)

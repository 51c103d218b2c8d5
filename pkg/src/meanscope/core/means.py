"""Quasi-arithmetic means, the monotone inverse solver and closed-form power means."""

import math
from typing import Sequence, Tuple, Union

import numpy as np

from meanscope.core.generators import analytic_derivative, split_affine, values
from meanscope.models.errors import DomainError, EvaluationError, RangeError
from meanscope.models.generator import Direction, Generator, Side
from meanscope.models.mean import MeanResult, SampleVector
from meanscope.utils.numeric import compensated_sum

BISECT_REL_WIDTH = 1e-10
NEWTON_STEPS = 4
MAX_BISECTIONS = 200
RESIDUAL_REL = 1e-13

Samples = Union[SampleVector, Sequence[float], np.ndarray]


class _Core:
    """f reduced to sign(a) * inner: offset and scale never change the mean and only cost range."""

    def __init__(self, g: Generator):
        self.g = g
        self.scale, self.offset, self.inner = split_affine(g.spec)
        self.unit = math.copysign(1.0, self.scale)
        self.sign = 1.0 if g.direction == Direction.INCREASING else -1.0

    def __call__(self, x) -> np.ndarray:
        return self.unit * values(self.inner, x)

    def slope(self, x) -> np.ndarray:
        return self.unit * analytic_derivative(self.inner, x, 1, Side.RIGHT)

    def to_f(self, t) -> np.ndarray:
        """Core value back in units of f."""
        return abs(self.scale) * t + self.offset


def _solve(core: _Core, t: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Solve core(x) = t on brackets [lo, hi]: geometric bisection, then guarded Newton.

    Without closed-form derivatives the bisection runs down to adjacent floats
    and keeps the better end of the bracket.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    tight = not core.g.analytic
    iters = 0
    for _ in range(MAX_BISECTIONS):
        mid = np.sqrt(lo * hi)
        if tight:
            open_ = (mid > lo) & (mid < hi)
        else:
            open_ = (hi - lo) > BISECT_REL_WIDTH * hi
        if not open_.any():
            break
        iters += 1
        below = core.sign * (core(mid) - t) < 0.0
        lo = np.where(open_ & below, mid, lo)
        hi = np.where(open_ & ~below, mid, hi)

    if tight:
        with np.errstate(all="ignore"):
            closer = np.abs(core(lo) - t) <= np.abs(core(hi) - t)
        return np.where(closer, lo, hi), iters

    x = np.sqrt(lo * hi)
    with np.errstate(all="ignore"):
        residual = np.abs(core(x) - t)
        for _ in range(NEWTON_STEPS):
            slope = core.slope(x)
            step = np.where(slope != 0.0, (core(x) - t) / slope, 0.0)
            candidate = x - step
            inside = np.isfinite(candidate) & (candidate >= lo) & (candidate <= hi)
            new_residual = np.where(inside, np.abs(core(np.where(inside, candidate, x)) - t), np.inf)
            take = inside & (new_residual < residual)
            if not take.any():
                break
            iters += 1
            x = np.where(take, candidate, x)
            residual = np.where(take, new_residual, residual)
    return x, iters


def invert(g: Generator, y: float) -> float:
    """
    f^{-1}(y) on the window.

    Args:
        g: Generator
        y: Target value between f(lo) and f(hi)

    Returns:
        x in [lo, hi] with f(x) = y up to rounding

    Raises:
        RangeError: if y lies outside [f(lo), f(hi)]
    """
    core = _Core(g)
    ends = values(g.spec, np.array([g.lo, g.hi]))
    lo_value, hi_value = float(ends.min()), float(ends.max())
    if not lo_value <= y <= hi_value:
        raise RangeError(y, lo_value, hi_value)
    t = np.array([(y - core.offset) / abs(core.scale)])
    x, _ = _solve(core, t, np.array([g.lo]), np.array([g.hi]))
    return float(np.clip(x[0], g.lo, g.hi))


def qa_mean_batch(g: Generator, xs) -> np.ndarray:
    """Quasi-arithmetic mean of every row of a 2-D array of entries."""
    return _qa_rows(g, np.atleast_2d(np.asarray(xs, dtype=float)))[0]


def _qa_rows(g: Generator, xs: np.ndarray):
    if xs.size and (xs.min() < g.lo or xs.max() > g.hi):
        bad = xs[(xs < g.lo) | (xs > g.hi)]
        raise DomainError(f"entry outside window {g.window}", float(bad.flat[0]))
    core = _Core(g)
    n = xs.shape[1]
    t = compensated_sum(core(xs), axis=1) / n
    lo = xs.min(axis=1)
    hi = xs.max(axis=1)
    x, iters = _solve(core, t, lo, hi)
    return np.clip(x, lo, hi), t, iters, core


def qa_mean(g: Generator, xs: Samples) -> MeanResult:
    """A_f(xs) = f^{-1}(mean of f(x_i)), with compensated summation and internality."""
    if not isinstance(xs, SampleVector):
        xs = SampleVector(entries=tuple(float(v) for v in np.ravel(xs)))
    row = np.array([xs.entries])
    x, t, iters, core = _qa_rows(g, row)
    value = float(x[0])
    residual = abs(core.scale) * float(abs(core(np.array([value]))[0] - t[0]))
    target = float(core.to_f(t[0]))
    if not residual <= RESIDUAL_REL * (1.0 + abs(target)):
        raise EvaluationError(f"mean residual {residual:.3g} exceeds the solver bound", value)
    return MeanResult(value=value, solver_iters=iters, residual=residual, target=target)


def arithmetic_mean(xs) -> np.ndarray:
    """Row-wise arithmetic mean with compensated summation."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    return compensated_sum(xs, axis=1) / xs.shape[1]


def power_mean(p: float, xs: Samples) -> float:
    """
    Closed-form p-th power mean; p = 0 is the geometric mean.

    Entries are scaled by their maximum first so that large |p| does not overflow.
    """
    entries = np.asarray(xs.entries if isinstance(xs, SampleVector) else xs, dtype=float).ravel()
    if p == 0.0:
        return float(math.exp(compensated_sum(np.log(entries)) / entries.size))
    top = float(entries.max())
    scaled = compensated_sum(np.power(entries / top, p)) / entries.size
    return float(top * scaled ** (1.0 / p))

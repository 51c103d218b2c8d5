"""Sampled checkers for subadditivity of quasi-arithmetic means.

Four checkers test equivalent characterizations (direct subadditivity,
concavity of Phi, subadditivity of Psi, the f'/f''_+ criterion); the others
test necessary conditions, a validator inequality and the convexity
auxiliaries. Every checker takes a generator and a CheckConfig and returns a
Verdict; failures carry a shrunk counterexample.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from meanscope.config.settings import CheckConfig
from meanscope.core.generators import canonicalize, difference, kink_points, split_affine, values
from meanscope.core.harness import Check, Measured, relative_budget, run_check, sample, verdict_from
from meanscope.core.means import arithmetic_mean, qa_mean_batch
from meanscope.core.semidiff import (
    ALPHA_ZERO_RATIO,
    KINK_TOL,
    curvature_classes,
    d1_values,
    d2_values,
    detect_kinks,
    find_alpha,
    has_room,
    near_any,
)
from meanscope.core.shrink import shrink_with
from meanscope.models.errors import MeanscopeError
from meanscope.models.estimates import AlphaReport
from meanscope.models.generator import Generator, Side, Window
from meanscope.models.verdict import Counterexample, Role, Status, Verdict
from meanscope.utils.sampling import log_grid, log_uniform, multiscale

logger = logging.getLogger(__name__)

DIRECT = "direct"
PHI = "phi"
PSI = "psi"
CRITERION_V = "criterion_v"
MA_BOUND = "ma_bound"
LOGCONCAVE = "fprime_logconcave"
F_CONVEX = "f_convex"
SHIFT_RATIO = "shift_ratio"
EQ546 = "eq546"
JENSEN = "jensen_convexity"
RATIO_CONVEX = "ratio_convex"
COMPARE = "compare"

# r = f'/f''_+ is sampled strictly below the detected threshold.
ALPHA_GUARD = 1e-5


# Evaluation helpers ------------------------------------------------------------


def _offset_free(g: Generator) -> Callable[[np.ndarray], np.ndarray]:
    """f minus its additive constant; inequalities between f-values do not see the constant."""
    scale, _, inner = split_affine(g.spec)
    return lambda x: scale * values(inner, x)


def _derivative(g: Generator, xs: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right derivative of ``order`` at every point; ``ok`` is False at kinks and failures."""
    flat = np.asarray(xs, dtype=float).ravel()
    vals = np.full(flat.shape, np.nan)
    errs = np.full(flat.shape, np.nan)
    ok = ~near_any(flat, kink_points(g.spec, order))
    if not g.analytic:
        ok &= has_room(g, flat, Side.RIGHT, order)
    if ok.any():
        fn = d1_values if order == 1 else d2_values
        try:
            v, e = fn(g, flat[ok], Side.RIGHT)
        except MeanscopeError as exc:
            logger.debug("Derivative failure on %d points: %s", int(ok.sum()), exc)
            ok[:] = False
        else:
            vals[ok] = v
            errs[ok] = e
    ok &= np.isfinite(vals) & np.isfinite(errs)
    shape = np.shape(xs)
    return vals.reshape(shape), errs.reshape(shape), ok.reshape(shape)


def _ratio_err(num, num_err, den, den_err):
    """Value and propagated error of num / den."""
    ratio = num / den
    return ratio, np.abs(ratio) * (num_err / np.abs(num) + den_err / np.abs(den))


def _window_box(g: Generator, top: float, width: int):
    lower = np.full(width, g.lo)
    upper = np.full(width, top)
    anchor = np.full(width, math.sqrt(g.lo * top))
    return lower, upper, anchor, np.ones(width, dtype=bool)


def _too_narrow(g: Generator, verdict_id: str, role: Role) -> Optional[Verdict]:
    if g.hi <= 2.0 * g.lo * (1.0 + 1e-9):
        return Verdict(
            id=verdict_id,
            role=role,
            status=Status.INCONCLUSIVE,
            note=f"window {g.window} leaves no room for sums (hi <= 2 lo)",
        )
    return None


def _finding(
    verdict_id: str,
    role: Role,
    kind: str,
    x: float,
    lhs: float,
    rhs: float,
    budget: float,
    note: str,
) -> Verdict:
    """Fail verdict for a structural finding at a single point (not sampled, not shrunk)."""
    ce = Counterexample(
        kind=kind,
        witness=[[float(x)]],
        labels=["x"],
        lhs=lhs,
        rhs=rhs,
        violation=lhs - rhs,
        err_budget=budget,
    )
    return Verdict(
        id=verdict_id,
        role=role,
        status=Status.FAIL,
        min_margin=rhs - lhs,
        counterexample=ce,
        note=note,
    )


# Check builders ----------------------------------------------------------------


def direct_check(g: Generator, cfg: CheckConfig) -> Check:
    """A_f(x + y) <= A_f(x) + A_f(y) on n-vectors in [lo, hi/2]."""
    n = cfg.arity
    top = g.hi / 2.0

    def draw(rng, count):
        return multiscale(rng, g.lo, top, (count, 2 * n))

    def measure(rows):
        x, y = rows[:, :n], rows[:, n:]
        lhs = qa_mean_batch(g, x + y)
        rhs = qa_mean_batch(g, x) + qa_mean_batch(g, y)
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    lower, upper, anchor, logs = _window_box(g, top, 2 * n)
    return Check(
        id=DIRECT,
        kind="subadditivity",
        role=Role.EQUIVALENCE,
        labels=["x", "y"],
        layout=[n, n],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def phi_check(g: Generator, cfg: CheckConfig) -> Check:
    """
    Midpoint concavity of Phi(u, v) = f(f^-1(u) + f^-1(v)).

    Points are drawn through their preimages: U_i = (f(a_i), f(b_i)). The
    midpoint of U_1, U_2 then has preimages A_f(a_1, a_2) and A_f(b_1, b_2).
    """
    f = _offset_free(g)
    top = g.hi / 2.0

    def draw(rng, count):
        return multiscale(rng, g.lo, top, (count, 4))

    def measure(rows):
        a1, b1, a2, b2 = rows.T
        lhs = 0.5 * (f(a1 + b1) + f(a2 + b2))
        rhs = f(qa_mean_batch(g, np.stack([a1, a2], axis=1)) + qa_mean_batch(g, np.stack([b1, b2], axis=1)))
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    lower, upper, anchor, logs = _window_box(g, top, 4)
    return Check(
        id=PHI,
        kind="phi_concavity",
        role=Role.EQUIVALENCE,
        labels=["a1", "b1", "a2", "b2"],
        layout=[1, 1, 1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def _psi(g: Generator, x: np.ndarray, y: np.ndarray):
    slope, slope_err, ok = _derivative(g, y, 1)
    ok &= slope > 0.0
    spread = difference(g.spec, x, y)
    value = spread / slope
    return value, np.abs(value) * slope_err / np.abs(slope), ok


def psi_check(g: Generator, cfg: CheckConfig) -> Check:
    """Psi(x1 + x2, y1 + y2) <= Psi(x1, y1) + Psi(x2, y2), Psi(x, y) = (f(x) - f(y)) / f'(y)."""
    top = g.hi / 2.0

    def draw(rng, count):
        return multiscale(rng, g.lo, top, (count, 4))

    def measure(rows):
        x1, y1, x2, y2 = rows.T
        lhs, e0, ok0 = _psi(g, x1 + x2, y1 + y2)
        p1, e1, ok1 = _psi(g, x1, y1)
        p2, e2, ok2 = _psi(g, x2, y2)
        rhs = p1 + p2
        budget = relative_budget(cfg, lhs, rhs) + e0 + e1 + e2
        return Measured(lhs, rhs, budget, ok0 & ok1 & ok2)

    lower, upper, anchor, logs = _window_box(g, top, 4)
    return Check(
        id=PSI,
        kind="psi_subadditivity",
        role=Role.EQUIVALENCE,
        labels=["x1", "y1", "x2", "y2"],
        layout=[1, 1, 1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def _r(g: Generator, x: np.ndarray):
    """r = f'/f''_+ with its propagated error; undefined where f''_+ <= 0."""
    d1, e1, ok1 = _derivative(g, x, 1)
    d2, e2, ok2 = _derivative(g, x, 2)
    ok = ok1 & ok2 & (d2 > 0.0) & (d1 > 0.0)
    r, err = _ratio_err(d1, e1, d2, e2)
    return r, err, ok


def alpha_bound(g: Generator, alpha: AlphaReport) -> float:
    """Upper end of the sampling range (lo, alpha) for r."""
    if alpha.unbounded:
        return g.hi
    return min(alpha.alpha * (1.0 - ALPHA_GUARD), g.hi)


def r_increasing_check(g: Generator, cfg: CheckConfig, alpha: AlphaReport) -> Check:
    """r(x) <= r(y) for lo < x <= y < alpha."""
    top = alpha_bound(g, alpha)

    def draw(rng, count):
        return np.sort(log_uniform(rng, g.lo, top, (count, 2)), axis=1)

    def measure(rows):
        lhs, el, okl = _r(g, rows[:, 0])
        rhs, er, okr = _r(g, rows[:, 1])
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs) + el + er, okl & okr)

    lower, upper, anchor, logs = _window_box(g, top, 2)
    return Check(
        id="criterion_v.increasing",
        kind="r_increasing",
        role=Role.EQUIVALENCE,
        labels=["x", "y"],
        layout=[1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
        extra=lambda rows: rows[:, 0] <= rows[:, 1],
    )


def r_superadditive_check(g: Generator, cfg: CheckConfig, alpha: AlphaReport) -> Check:
    """r(x) + r(y) <= r(x + y) for x, y > lo with x + y < alpha."""
    top = alpha_bound(g, alpha)

    def draw(rng, count):
        s = log_uniform(rng, 2.0 * g.lo, top, count)
        t = rng.uniform(0.0, 1.0, count)
        x = g.lo + t * (s - 2.0 * g.lo)
        y = np.maximum(s - x, g.lo)
        return np.stack([x, y], axis=1)

    def measure(rows):
        x, y = rows[:, 0], rows[:, 1]
        rx, ex, okx = _r(g, x)
        ry, ey, oky = _r(g, y)
        rhs, es, oks = _r(g, x + y)
        lhs = rx + ry
        budget = relative_budget(cfg, lhs, rhs) + ex + ey + es
        return Measured(lhs, rhs, budget, okx & oky & oks)

    lower, upper, anchor, logs = _window_box(g, top, 2)
    return Check(
        id="criterion_v.superadditive",
        kind="r_superadditive",
        role=Role.EQUIVALENCE,
        labels=["x", "y"],
        layout=[1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
        extra=lambda rows: rows.sum(axis=1) <= top,
    )


def ma_bound_check(g: Generator, cfg: CheckConfig, superadditive: bool = False) -> Check:
    """Arithmetic mean <= A_f (or >= with ``superadditive``) on n-vectors."""
    n = cfg.arity

    def draw(rng, count):
        return log_uniform(rng, g.lo, g.hi, (count, n))

    def measure(rows):
        arithmetic = arithmetic_mean(rows)
        quasi = qa_mean_batch(g, rows)
        lhs, rhs = (quasi, arithmetic) if superadditive else (arithmetic, quasi)
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    lower, upper, anchor, logs = _window_box(g, g.hi, n)
    return Check(
        id=MA_BOUND,
        kind="ma_bound_superadditive" if superadditive else "ma_bound",
        role=Role.NECESSARY,
        labels=["x"],
        layout=[n],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def logconcave_check(g: Generator, cfg: CheckConfig) -> Check:
    """f'(x) f'(u) <= f'((x + u)/2)^2, as f'(x)/f'(m) <= f'(m)/f'(u)."""

    def draw(rng, count):
        return log_uniform(rng, g.lo, g.hi, (count, 2))

    def measure(rows):
        x, u = rows[:, 0], rows[:, 1]
        d, e, ok = _derivative(g, np.stack([x, 0.5 * (x + u), u], axis=1), 1)
        ok = ok.all(axis=1) & (d > 0.0).all(axis=1)
        lhs, el = _ratio_err(d[:, 0], e[:, 0], d[:, 1], e[:, 1])
        rhs, er = _ratio_err(d[:, 1], e[:, 1], d[:, 2], e[:, 2])
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs) + el + er, ok)

    lower, upper, anchor, logs = _window_box(g, g.hi, 2)
    return Check(
        id=LOGCONCAVE,
        kind="fprime_logconcavity",
        role=Role.NECESSARY,
        labels=["x", "u"],
        layout=[1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def f_convex_check(g: Generator, cfg: CheckConfig) -> Check:
    """f((x + y)/2) <= (f(x) + f(y))/2."""
    f = _offset_free(g)

    def draw(rng, count):
        return log_uniform(rng, g.lo, g.hi, (count, 2))

    def measure(rows):
        x, y = rows[:, 0], rows[:, 1]
        lhs = f(0.5 * (x + y))
        rhs = 0.5 * (f(x) + f(y))
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    lower, upper, anchor, logs = _window_box(g, g.hi, 2)
    return Check(
        id=F_CONVEX,
        kind="f_convexity",
        role=Role.NECESSARY,
        labels=["x", "y"],
        layout=[1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def shift_ratio_check(g: Generator, cfg: CheckConfig) -> Check:
    """x -> f'(x + y)/f'(x) is decreasing: for x <= x', f'(x'+y)/f'(x') <= f'(x+y)/f'(x)."""
    top = g.hi / 2.0

    def draw(rng, count):
        pair = np.sort(log_uniform(rng, g.lo, top, (count, 2)), axis=1)
        y = log_uniform(rng, g.lo, top, (count, 1))
        return np.concatenate([pair, y], axis=1)

    def measure(rows):
        x, x2, y = rows.T
        d, e, ok = _derivative(g, np.stack([x, x2, x + y, x2 + y], axis=1), 1)
        ok = ok.all(axis=1) & (d > 0.0).all(axis=1)
        lhs, el = _ratio_err(d[:, 3], e[:, 3], d[:, 1], e[:, 1])
        rhs, er = _ratio_err(d[:, 2], e[:, 2], d[:, 0], e[:, 0])
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs) + el + er, ok)

    lower, upper, anchor, logs = _window_box(g, top, 3)
    return Check(
        id=SHIFT_RATIO,
        kind="shift_ratio",
        role=Role.NECESSARY,
        labels=["x", "x'", "y"],
        layout=[1, 1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
        extra=lambda rows: rows[:, 0] <= rows[:, 1],
    )


def _curvature_ratio(g: Generator, x: np.ndarray):
    """q = f''_+/f' with its propagated error."""
    d1, e1, ok1 = _derivative(g, x, 1)
    d2, e2, ok2 = _derivative(g, x, 2)
    ok = ok1 & ok2 & (d1 > 0.0)
    q = d2 / d1
    return q, np.abs(q) * e1 / np.abs(d1) + e2 / np.abs(d1), ok


def eq546_check(g: Generator, cfg: CheckConfig) -> Check:
    """q(x + y)(u + v)^2 <= q(x) u^2 + q(y) v^2 with q = f''_+/f' and (u, v) in [-1, 1]^2."""
    top = g.hi / 2.0

    def draw(rng, count):
        xy = log_uniform(rng, g.lo, top, (count, 2))
        uv = rng.uniform(-1.0, 1.0, (count, 2))
        return np.concatenate([xy, uv], axis=1)

    def measure(rows):
        x, y, u, v = rows.T
        qs, es, oks = _curvature_ratio(g, x + y)
        qx, ex, okx = _curvature_ratio(g, x)
        qy, ey, oky = _curvature_ratio(g, y)
        w = (u + v) ** 2
        lhs = qs * w
        rhs = qx * u * u + qy * v * v
        budget = relative_budget(cfg, lhs, rhs) + es * w + ex * u * u + ey * v * v
        return Measured(lhs, rhs, budget, oks & okx & oky)

    mid = math.sqrt(g.lo * top)
    return Check(
        id=EQ546,
        kind="eq546",
        role=Role.VALIDATOR,
        labels=["x", "y", "u", "v"],
        layout=[1, 1, 1, 1],
        draw=draw,
        measure=measure,
        lower=np.array([g.lo, g.lo, -1.0, -1.0]),
        upper=np.array([top, top, 1.0, 1.0]),
        anchor=np.array([mid, mid, 0.0, 0.0]),
        log_coords=np.array([True, True, False, False]),
    )


def jensen_check(g: Generator, cfg: CheckConfig) -> Check:
    """A_f((x + y)/2) <= (A_f(x) + A_f(y))/2 on n-vectors."""
    n = cfg.arity

    def draw(rng, count):
        return log_uniform(rng, g.lo, g.hi, (count, 2 * n))

    def measure(rows):
        x, y = rows[:, :n], rows[:, n:]
        lhs = qa_mean_batch(g, 0.5 * (x + y))
        rhs = 0.5 * (qa_mean_batch(g, x) + qa_mean_batch(g, y))
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    lower, upper, anchor, logs = _window_box(g, g.hi, 2 * n)
    return Check(
        id=JENSEN,
        kind="jensen_convexity",
        role=Role.AUXILIARY,
        labels=["x", "y"],
        layout=[n, n],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def _plain_ratio(g: Generator, x: np.ndarray):
    """f'/f'' without a sign restriction on f''."""
    d1, e1, ok1 = _derivative(g, x, 1)
    d2, e2, ok2 = _derivative(g, x, 2)
    r, err = _ratio_err(d1, e1, d2, e2)
    return r, err, ok1 & ok2 & (d2 != 0.0)


def ratio_convex_check(g: Generator, cfg: CheckConfig) -> Check:
    """Midpoint convexity of f'/f''."""

    def draw(rng, count):
        return log_uniform(rng, g.lo, g.hi, (count, 2))

    def measure(rows):
        x, y = rows[:, 0], rows[:, 1]
        lhs, em, okm = _plain_ratio(g, 0.5 * (x + y))
        rx, ex, okx = _plain_ratio(g, x)
        ry, ey, oky = _plain_ratio(g, y)
        rhs = 0.5 * (rx + ry)
        budget = relative_budget(cfg, lhs, rhs) + em + 0.5 * (ex + ey)
        return Measured(lhs, rhs, budget, okm & okx & oky)

    lower, upper, anchor, logs = _window_box(g, g.hi, 2)
    return Check(
        id=RATIO_CONVEX,
        kind="ratio_convexity",
        role=Role.AUXILIARY,
        labels=["x", "y"],
        layout=[1, 1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


# Checkers ----------------------------------------------------------------------


def check_subadditive_direct(g: Generator, cfg: CheckConfig) -> Verdict:
    """A_f(x + y) <= A_f(x) + A_f(y) by sampling n-vector pairs."""
    g = canonicalize(g)
    return _too_narrow(g, DIRECT, Role.EQUIVALENCE) or run_check(direct_check(g, cfg), cfg)


def check_phi_concavity(g: Generator, cfg: CheckConfig) -> Verdict:
    """Concavity of Phi_f by midpoint sampling in f-image coordinates."""
    g = canonicalize(g)
    return _too_narrow(g, PHI, Role.EQUIVALENCE) or run_check(phi_check(g, cfg), cfg)


def check_psi_subadditive(g: Generator, cfg: CheckConfig) -> Verdict:
    """Subadditivity of Psi_f; samples at kinks or derivative failures are redrawn."""
    g = canonicalize(g)
    return _too_narrow(g, PSI, Role.EQUIVALENCE) or run_check(psi_check(g, cfg), cfg)


def _combine(verdict_id: str, role: Role, parts: List[Verdict]) -> Verdict:
    failed = [v for v in parts if v.failed]
    margins = [v.min_margin for v in parts if v.min_margin is not None]
    samples = sum(v.samples_run for v in parts)
    if failed:
        worst = max(failed, key=lambda v: v.counterexample.violation)
        status, ce, note = Status.FAIL, worst.counterexample, worst.note
    elif any(v.status == Status.INCONCLUSIVE for v in parts):
        status, ce = Status.INCONCLUSIVE, None
        note = "; ".join(v.note for v in parts if v.note)
    else:
        status, ce, note = Status.PASS, None, None
    return Verdict(
        id=verdict_id,
        role=role,
        status=status,
        min_margin=min(margins) if margins else None,
        samples_run=samples,
        counterexample=ce,
        note=note,
    )


def _pattern_failure(g: Generator, alpha: AlphaReport) -> Verdict:
    x = alpha.violations[0]
    d1, _, _ = _derivative(g, np.array([x]), 1)
    d2, _, _ = _derivative(g, np.array([x]), 2)
    ratio = float(abs(d2[0]) * x / abs(d1[0]))
    return _finding(
        CRITERION_V,
        Role.EQUIVALENCE,
        "alpha_pattern",
        x,
        ratio,
        0.0,
        ALPHA_ZERO_RATIO,
        f"f''_+ is not positive-then-zero: {alpha.violation_count} grid points break the pattern",
    )


def check_criterion_v(
    g: Generator, cfg: CheckConfig, alpha: Optional[AlphaReport] = None
) -> Verdict:
    """
    f''_+ positive on (0, alpha) and zero beyond, with f'/f''_+ increasing and
    superadditive on (0, alpha).

    A broken sign pattern or a kink of f' fails the criterion outright; alpha = 0
    passes it vacuously.
    """
    g = canonicalize(g)
    alpha = alpha or find_alpha(g, cfg.scan_points)
    if not alpha.pattern_ok:
        return _pattern_failure(g, alpha)
    kinks = detect_kinks(g, 1, cfg.scan_points)
    if not kinks.is_smooth:
        k = kinks.points[0]
        return _finding(
            CRITERION_V,
            Role.EQUIVALENCE,
            "differentiability",
            k.x,
            abs(k.jump),
            0.0,
            KINK_TOL * (1.0 + abs(k.left_value) + abs(k.right_value)),
            f"f' jumps from {k.left_value:.6g} to {k.right_value:.6g}",
        )
    if alpha.alpha == 0.0:
        return Verdict(
            id=CRITERION_V,
            role=Role.EQUIVALENCE,
            status=Status.PASS,
            note="f''_+ vanishes on the window (alpha = 0)",
        )

    top = alpha_bound(g, alpha)
    parts = []
    if top > g.lo * (1.0 + 1e-9):
        check = r_increasing_check(g, cfg, alpha)
        parts.append(verdict_from(check, sample(check, cfg), cfg, CRITERION_V))
    if top > 2.0 * g.lo * (1.0 + 1e-9):
        check = r_superadditive_check(g, cfg, alpha)
        parts.append(verdict_from(check, sample(check, cfg), cfg, CRITERION_V))
    if not parts:
        return Verdict(
            id=CRITERION_V,
            role=Role.EQUIVALENCE,
            status=Status.PASS,
            note=f"alpha {alpha.describe()} leaves nothing to sample",
        )
    return _combine(CRITERION_V, Role.EQUIVALENCE, parts)


def check_ma_bound(g: Generator, cfg: CheckConfig, superadditive: bool = False) -> Verdict:
    """Arithmetic mean <= A_f (necessary for subadditivity); ``superadditive`` flips it."""
    return run_check(ma_bound_check(canonicalize(g), cfg, superadditive), cfg)


def check_fprime_logconcave(g: Generator, cfg: CheckConfig) -> Verdict:
    return run_check(logconcave_check(canonicalize(g), cfg), cfg)


def check_f_convex(g: Generator, cfg: CheckConfig) -> Verdict:
    return run_check(f_convex_check(canonicalize(g), cfg), cfg)


def check_shift_ratio(g: Generator, cfg: CheckConfig) -> Verdict:
    g = canonicalize(g)
    return _too_narrow(g, SHIFT_RATIO, Role.NECESSARY) or run_check(shift_ratio_check(g, cfg), cfg)


def check_eq546(g: Generator, cfg: CheckConfig) -> Verdict:
    g = canonicalize(g)
    return _too_narrow(g, EQ546, Role.VALIDATOR) or run_check(eq546_check(g, cfg), cfg)


def check_jensen_convexity(g: Generator, cfg: CheckConfig) -> Verdict:
    """Midpoint convexity of the n-variable mean A_f."""
    return run_check(jensen_check(canonicalize(g), cfg), cfg)


def check_ratio_convex(g: Generator, cfg: CheckConfig) -> Verdict:
    """
    f'' nowhere zero and f'/f'' positive and convex on the window.

    Inconclusive when f'' vanishes somewhere or has kinks, since the
    characterization it backs does not apply there.
    """
    g = canonicalize(g)
    grid = log_grid(g.lo, g.hi, cfg.scan_points)
    classes = curvature_classes(g, grid)
    zeros = int((classes == 0).sum())
    if zeros:
        return Verdict(
            id=RATIO_CONVEX,
            role=Role.AUXILIARY,
            status=Status.INCONCLUSIVE,
            note=f"f'' is indistinguishable from zero at {zeros} of {grid.size} grid points",
        )
    kinks = detect_kinks(g, 2, cfg.scan_points)
    if not kinks.is_smooth:
        return Verdict(
            id=RATIO_CONVEX,
            role=Role.AUXILIARY,
            status=Status.INCONCLUSIVE,
            note=f"f'' has {len(kinks.points)} kinks",
        )
    r, _, ok = _plain_ratio(g, grid)
    negative = ok & (r <= 0.0)
    if negative.any():
        i = int(np.flatnonzero(negative)[0])
        return _finding(
            RATIO_CONVEX,
            Role.AUXILIARY,
            "ratio_positivity",
            float(grid[i]),
            0.0,
            float(r[i]),
            cfg.tol_rel * (1.0 + abs(float(r[i]))),
            "f'/f'' is not positive",
        )
    return run_check(ratio_convex_check(g, cfg), cfg)


def _pointwise_check(f: Generator, g: Generator, cfg: CheckConfig, window: Window) -> Check:
    def draw(rng, count):
        return log_uniform(rng, window.lo, window.hi, (count, 1))

    def measure(rows):
        x = rows[:, 0]
        qf, ef, okf = _curvature_ratio(f, x)
        qg, eg, okg = _curvature_ratio(g, x)
        return Measured(qf, qg, relative_budget(cfg, qf, qg) + ef + eg, okf & okg)

    lower, upper, anchor, logs = _window_box(f, window.hi, 1)
    lower[:] = window.lo
    anchor[:] = window.geometric_mid
    return Check(
        id="compare.pointwise",
        kind="curvature_comparison",
        role=Role.COMPARISON,
        labels=["x"],
        layout=[1],
        draw=draw,
        measure=measure,
        lower=lower,
        upper=upper,
        anchor=anchor,
        log_coords=logs,
    )


def _means_check(f: Generator, g: Generator, cfg: CheckConfig, window: Window) -> Check:
    n = cfg.arity

    def draw(rng, count):
        return log_uniform(rng, window.lo, window.hi, (count, n))

    def measure(rows):
        lhs = qa_mean_batch(f, rows)
        rhs = qa_mean_batch(g, rows)
        return Measured(lhs, rhs, relative_budget(cfg, lhs, rhs), np.ones(len(rows), dtype=bool))

    return Check(
        id="compare.means",
        kind="mean_comparison",
        role=Role.COMPARISON,
        labels=["x"],
        layout=[n],
        draw=draw,
        measure=measure,
        lower=np.full(n, window.lo),
        upper=np.full(n, window.hi),
        anchor=np.full(n, window.geometric_mid),
        log_coords=np.ones(n, dtype=bool),
    )


def compare_means(f: Generator, g: Generator, cfg: CheckConfig) -> Verdict:
    """
    A_f <= A_g, checked both through f''/f' <= g''/g' pointwise and through
    direct comparison of the means on random vectors.

    The two readings must agree; when they do not the verdict is Inconclusive
    and the note says so.
    """
    f, g = canonicalize(f), canonicalize(g)
    lo, hi = max(f.lo, g.lo), min(f.hi, g.hi)
    if not lo < hi:
        return Verdict(
            id=COMPARE,
            role=Role.COMPARISON,
            status=Status.INCONCLUSIVE,
            note="the windows of the two generators do not overlap",
        )
    for label, gen in (("first", f), ("second", g)):
        if not detect_kinks(gen, 2, cfg.scan_points).is_smooth:
            return Verdict(
                id=COMPARE,
                role=Role.COMPARISON,
                status=Status.INCONCLUSIVE,
                note=f"the {label} generator is not twice differentiable on the window",
            )
    window = Window(lo=lo, hi=hi)
    pointwise = run_check(_pointwise_check(f, g, cfg, window), cfg)
    direct = run_check(_means_check(f, g, cfg, window), cfg)
    note = f"pointwise: {pointwise.status.value}, means: {direct.status.value}"
    if pointwise.status == direct.status:
        status = direct.status
    else:
        status = Status.INCONCLUSIVE
        if Status.INCONCLUSIVE not in (pointwise.status, direct.status):
            note = f"pointwise and direct comparisons disagree ({note})"
            logger.warning("compare: %s", note)
    margins = [v.min_margin for v in (pointwise, direct) if v.min_margin is not None]
    return Verdict(
        id=COMPARE,
        role=Role.COMPARISON,
        status=status,
        min_margin=min(margins) if margins else None,
        samples_run=pointwise.samples_run + direct.samples_run,
        counterexample=(direct.counterexample or pointwise.counterexample)
        if status == Status.FAIL
        else None,
        note=note,
    )


# Registry ----------------------------------------------------------------------

CHECKERS: Dict[str, Callable[[Generator, CheckConfig], Verdict]] = {
    MA_BOUND: check_ma_bound,
    LOGCONCAVE: check_fprime_logconcave,
    F_CONVEX: check_f_convex,
    SHIFT_RATIO: check_shift_ratio,
    DIRECT: check_subadditive_direct,
    PHI: check_phi_concavity,
    PSI: check_psi_subadditive,
    CRITERION_V: check_criterion_v,
    EQ546: check_eq546,
    JENSEN: check_jensen_convexity,
    RATIO_CONVEX: check_ratio_convex,
}

_BUILDERS: Dict[str, Callable[[Generator, CheckConfig], Check]] = {
    "subadditivity": direct_check,
    "phi_concavity": phi_check,
    "psi_subadditivity": psi_check,
    "r_increasing": lambda g, cfg: r_increasing_check(g, cfg, find_alpha(g, cfg.scan_points)),
    "r_superadditive": lambda g, cfg: r_superadditive_check(g, cfg, find_alpha(g, cfg.scan_points)),
    "ma_bound": ma_bound_check,
    "ma_bound_superadditive": lambda g, cfg: ma_bound_check(g, cfg, superadditive=True),
    "fprime_logconcavity": logconcave_check,
    "f_convexity": f_convex_check,
    "shift_ratio": shift_ratio_check,
    "eq546": eq546_check,
    "jensen_convexity": jensen_check,
    "ratio_convexity": ratio_convex_check,
}


def check_for_kind(kind: str, g: Generator, cfg: CheckConfig) -> Optional[Check]:
    """Sampled check that produces counterexamples of ``kind`` (None for point findings)."""
    builder = _BUILDERS.get(kind)
    return builder(canonicalize(g), cfg) if builder else None


def shrink(ce: Counterexample, g: Generator, cfg: CheckConfig) -> Counterexample:
    """Shrink a counterexample of any sampled checker for ``g`` toward the window middle."""
    check = check_for_kind(ce.kind, g, cfg)
    if check is None:
        return ce
    return shrink_with(check, ce, cfg)

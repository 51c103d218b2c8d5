"""Integration tests running the whole battery on generators with known answers."""

import math

import numpy as np
import pytest

from meanscope.config.settings import CheckConfig
from meanscope.core.battery import EQUIVALENCE_STAGE, run_battery
from meanscope.core.checkers import (
    MA_BOUND,
    check_eq546,
    check_jensen_convexity,
    check_psi_subadditive,
    check_ratio_convex,
    eq546_check,
)
from meanscope.core.semidiff import find_alpha
from meanscope.models.verdict import Resolution, Status
from meanscope.utils.sampling import stream

STRESS_SPLINES = 200
STRESS_SEEDS = range(10)


def _log_mean_exp(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.logaddexp.reduce(values) - math.log(len(values)))


def _subadditive_spline(rng) -> str:
    """
    C^1 spline with f'' = c0 on (0, b1), c1 < c0 on (b1, b2) and 0 beyond.

    f'/f'' is x then x + b1 (c0/c1 - 1), so it is increasing and, with
    b2 <= 2 b1, superadditive below b2.
    """
    b1 = float(rng.uniform(0.5, 50.0))
    b2 = b1 * float(rng.uniform(1.1, 2.0))
    c0 = float(rng.uniform(0.5, 5.0))
    c1 = c0 * float(rng.uniform(0.1, 0.9))
    s1 = c0 * b1
    s2 = s1 + c1 * (b2 - b1)
    return f"spline({b1!r}, {b2!r}; 0, {s1!r}, {s2!r}; {c0!r}, {c1!r}, 0)"


def _monotone_spline(rng) -> str:
    """
    Random increasing C^1 spline with one to three knots and curvature of either sign.

    Curvatures are drawn at least 0.2 away from zero, except for a flat last
    piece. Each piece keeps at least a tenth of its starting slope and the
    last piece is never concave, so f stays increasing up to hi.
    """
    m = int(rng.integers(1, 4))
    knots = np.sort(np.exp(rng.uniform(math.log(5e-3), math.log(200.0), m)))
    starts = np.concatenate([[0.0], knots])
    slopes = [float(rng.uniform(0.1, 3.0))]
    curvatures = []
    for i in range(m):
        width = starts[i + 1] - starts[i]
        if rng.uniform() < 0.7:
            bent = float(rng.uniform(0.2, 3.0))
        else:
            bent = -float(rng.uniform(0.2, 1.0))
        c = max(bent, -0.9 * slopes[-1] / width)
        curvatures.append(c)
        slopes.append(slopes[-1] + c * width)
    curvatures.append(float(rng.choice([0.0, rng.uniform(0.2, 2.0)])))
    parts = [", ".join(repr(float(v)) for v in seq) for seq in (knots, slopes, curvatures)]
    return f"spline({parts[0]}; {parts[1]}; {parts[2]})"


def _shifted_quadratic(rng) -> str:
    """a x + x^2/2: f'/f'' = a + x is not superadditive."""
    return f"spline(; {float(rng.uniform(0.5, 5.0))!r}; 1)"


class TestPowerFamily:
    """Tests for the classical power means."""

    @pytest.mark.parametrize("p", [1, 1.5, 2, 3])
    def test_subadditive(self, make_generator, fast_config, p):
        report = run_battery(make_generator(f"power({p})"), fast_config)
        assert report.resolution == Resolution.SUBADDITIVE, report.details
        for checker_id in EQUIVALENCE_STAGE:
            assert report.verdict(checker_id).passed, checker_id
        ma = report.verdict(MA_BOUND)
        assert ma.passed
        assert ma.counterexample is None

    @pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
    def test_not_subadditive(self, make_generator, fast_config, p):
        report = run_battery(make_generator(f"power({p})"), fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE, report.details
        for checker_id in EQUIVALENCE_STAGE:
            assert report.verdict(checker_id).failed, checker_id

    @pytest.mark.parametrize("text", ["power(-1)", "log"])
    def test_harmonic_and_geometric(self, make_generator, fast_config, text):
        report = run_battery(make_generator(text), fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE


class TestExponential:
    """Tests for the exponential mean, which passes every necessary condition."""

    def test_direct_counterexample_survives_closed_form(self, exp1, fast_config):
        """Test the shrunk witness still violates subadditivity for ln(mean(exp))."""
        report = run_battery(exp1, fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE

        x, y = report.verdict("direct").counterexample.witness
        summed = [a + b for a, b in zip(x, y)]
        gap = _log_mean_exp(summed) - _log_mean_exp(x) - _log_mean_exp(y)
        assert gap >= 1e-3

    def test_eq546_unit_witness(self, exp1, fast_config):
        """Test u = v = 1 gives 4 q <= 2 q with q = 1."""
        check = eq546_check(exp1, fast_config)
        ce = check.counterexample(np.array([1.0, 1.0, 1.0, 1.0]))
        assert ce.violation == pytest.approx(2.0, rel=1e-6)
        assert ce.significant
        assert check_eq546(exp1, fast_config).failed

    def test_scaled_exponential(self, make_generator, fast_config):
        report = run_battery(make_generator("exp(0.5)"), fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE


class TestConvexityAgreement:
    """Tests that Jensen convexity of the mean tracks convexity of f'/f''."""

    @pytest.mark.parametrize(
        "text",
        ["power(1.5)", "power(2)", "power(3)", "exp(1)", "exp(0.5)", "x^2 + x", "power(0.5)", "log"],
    )
    def test_smooth_generators(self, make_generator, fast_config, text):
        g = make_generator(text)
        jensen = check_jensen_convexity(g, fast_config)
        ratio = check_ratio_convex(g, fast_config)
        assert jensen.status != Status.INCONCLUSIVE
        assert jensen.status == ratio.status


@pytest.mark.slow
class TestStressFamilies:
    """Random spline families: the equivalent conditions must never split."""

    def test_subadditive_splines(self, make_generator):
        rng = stream(2024, "stress/subadditive")
        cfg = CheckConfig(samples=1000, seed=1)
        for _ in range(STRESS_SPLINES):
            text = _subadditive_spline(rng)
            g = make_generator(text)
            report = run_battery(g, cfg)
            assert report.resolution == Resolution.SUBADDITIVE, (text, report.details)
            assert report.verdict("eq546").passed, text
            assert report.alpha.alpha == pytest.approx(g.spec.knots[-1], rel=1e-3)

    def test_shifted_quadratics(self, make_generator):
        rng = stream(2024, "stress/shifted")
        cfg = CheckConfig(samples=2000, seed=1)
        for _ in range(20):
            text = _shifted_quadratic(rng)
            report = run_battery(make_generator(text), cfg)
            assert report.resolution == Resolution.NOT_SUBADDITIVE, (text, report.details)

    def test_resolution_seed_invariant(self, make_generator):
        rng = stream(2024, "stress/seeds")
        texts = [_subadditive_spline(rng) for _ in range(3)] + [_shifted_quadratic(rng)]
        for text in texts:
            g = make_generator(text)
            resolutions = {
                run_battery(g, CheckConfig(samples=1000, seed=seed)).resolution
                for seed in STRESS_SEEDS
            }
            assert len(resolutions) == 1, text
            assert Resolution.DISAGREEMENT not in resolutions

    def test_alpha_matches_last_curved_knot(self, make_generator):
        rng = stream(2024, "stress/alpha")
        for _ in range(20):
            text = _subadditive_spline(rng)
            g = make_generator(text)
            report = find_alpha(g)
            assert report.pattern_ok, text
            assert report.alpha == pytest.approx(g.spec.knots[-1], rel=1e-3)

    def test_general_splines_never_disagree(self, make_generator):
        rng = stream(2024, "stress/general")
        cfg = CheckConfig(samples=2000, seed=3)
        for _ in range(STRESS_SPLINES):
            text = _monotone_spline(rng)
            report = run_battery(make_generator(text), cfg)
            assert report.resolution != Resolution.DISAGREEMENT, (text, report.details)

    def test_general_resolution_seed_invariant(self, make_generator):
        rng = stream(2024, "stress/general-seeds")
        for _ in range(5):
            text = _monotone_spline(rng)
            g = make_generator(text)
            resolutions = {
                run_battery(g, CheckConfig(samples=2000, seed=seed)).resolution
                for seed in STRESS_SEEDS
            }
            assert len(resolutions) == 1, (text, resolutions)
            assert Resolution.DISAGREEMENT not in resolutions


class TestCurvedOnlyNearWindowBottom:
    """A generator whose curvature ends just above lo, so every violation sits at small scales."""

    TEXT = "spline(0.015486; 1.17666, 1.20648; 1.92563, 0.0)"

    @pytest.mark.parametrize("seed", [1, 3, 7])
    def test_equivalent_conditions_all_fail(self, make_generator, seed):
        report = run_battery(make_generator(self.TEXT), CheckConfig(samples=1000, seed=seed))
        assert report.resolution == Resolution.NOT_SUBADDITIVE, report.details
        for checker_id in EQUIVALENCE_STAGE:
            assert report.verdict(checker_id).failed, checker_id

    def test_psi_witness_below_alpha(self, make_generator):
        """Test the witness reaches below the last knot; above it f is linear and Psi additive."""
        g = make_generator(self.TEXT)
        verdict = check_psi_subadditive(g, CheckConfig(samples=1000, seed=3))
        assert verdict.failed
        x1, y1, x2, y2 = (row[0] for row in verdict.counterexample.witness)
        assert min(x1, y1, x2, y2) < 0.015486

"""Unit tests for the sampling harness and counterexample shrinking."""

import numpy as np
import pytest

from meanscope.config.settings import CheckConfig
from meanscope.core.checkers import direct_check
from meanscope.core.harness import (
    Check,
    Measured,
    Summary,
    relative_budget,
    run_check,
)
from meanscope.core.shrink import shrink_with
from meanscope.models.errors import EvaluationError
from meanscope.models.verdict import Role, Status
from meanscope.utils.sampling import chunk_counts, stream


def _uniform_check(measure, extra=None) -> Check:
    """One coordinate drawn uniformly from [0, 1], anchored at 0."""

    def draw(rng, count):
        return rng.uniform(0.0, 1.0, (count, 1))

    return Check(
        id="toy",
        kind="toy",
        role=Role.AUXILIARY,
        labels=["x"],
        layout=[1],
        draw=draw,
        measure=measure,
        lower=np.array([0.0]),
        upper=np.array([1.0]),
        anchor=np.array([0.0]),
        log_coords=np.array([False]),
        extra=extra,
    )


def _below(bound: float, budget: float = 0.0):
    def measure(rows):
        lhs = rows[:, 0]
        rhs = np.full(len(rows), bound)
        return Measured(lhs, rhs, np.full(len(rows), budget), np.ones(len(rows), dtype=bool))

    return measure


class TestRunCheck:
    """Tests for sampling and verdict construction."""

    def test_pass(self):
        cfg = CheckConfig(samples=500, seed=1)
        verdict = run_check(_uniform_check(_below(1.0)), cfg)
        assert verdict.status == Status.PASS
        assert verdict.samples_run == 500
        assert 0.0 <= verdict.min_margin <= 1.0

    def test_fail_reports_worst_sample(self):
        """Test the witness is the largest draw across all chunks."""
        cfg = CheckConfig(samples=2000, seed=5, shrink_floor=1.0)
        verdict = run_check(_uniform_check(_below(0.5)), cfg)
        draws = np.concatenate(
            [
                stream(cfg.seed, "toy", i).uniform(0.0, 1.0, (n, 1))[:, 0]
                for i, n in enumerate(chunk_counts(cfg.samples, cfg.chunk_size))
            ]
        )
        ce = verdict.counterexample
        assert verdict.status == Status.FAIL
        assert ce.witness == [[float(draws.max())]]
        assert ce.sample_index == int(np.argmax(draws))
        assert ce.violation == pytest.approx(draws.max() - 0.5)

    def test_invalid_rows_inconclusive(self):
        """Test rows that cannot be evaluated are redrawn and then reported."""

        def measure(rows):
            m = _below(1.0)(rows)
            return m._replace(valid=rows[:, 0] < 0.5)

        verdict = run_check(_uniform_check(measure), CheckConfig(samples=400, seed=2))
        assert verdict.status == Status.INCONCLUSIVE
        assert "could not be evaluated" in verdict.note

    def test_evaluation_error_becomes_invalid(self):
        def measure(rows):
            raise EvaluationError("boom")

        verdict = run_check(_uniform_check(measure), CheckConfig(samples=100, seed=2))
        assert verdict.status == Status.INCONCLUSIVE
        assert verdict.min_margin is None

    def test_thread_count_does_not_change_verdict(self, make_generator):
        """Test chunk results are reduced in chunk order whatever the worker count."""
        g = make_generator("power(0.5)")
        one = CheckConfig(samples=3000, seed=11, threads=1)
        four = one.model_copy(update={"threads": 4})
        a = run_check(direct_check(g, one), one)
        b = run_check(direct_check(g, four), four)
        assert a.model_dump() == b.model_dump()

    def test_seed_reproducible(self, power2):
        cfg = CheckConfig(samples=1000, seed=42)
        first = run_check(direct_check(power2, cfg), cfg)
        assert run_check(direct_check(power2, cfg), cfg) == first


class TestSummary:
    """Tests for chunk reduction."""

    def test_merge_prefers_larger_violation(self):
        a = Summary(worst_violation=1.0, worst_index=3, worst_row=np.array([1.0]))
        b = Summary(worst_violation=2.0, worst_index=9, worst_row=np.array([2.0]))
        assert a.merge(b).worst_index == 9

    def test_merge_ties_prefer_earlier_index(self):
        a = Summary(worst_violation=1.0, worst_index=5, worst_row=np.array([1.0]))
        b = Summary(worst_violation=1.0, worst_index=2, worst_row=np.array([2.0]))
        assert a.merge(b).worst_index == 2

    def test_merge_counts(self):
        a = Summary(min_margin=0.5, valid=3, invalid=1)
        merged = a.merge(Summary(min_margin=0.2, valid=2, invalid=0))
        assert (merged.min_margin, merged.valid, merged.invalid) == (0.2, 5, 1)

    def test_relative_budget(self):
        cfg = CheckConfig(tol_rel=1e-6)
        budget = relative_budget(cfg, np.array([1.0]), np.array([-2.0]))
        assert budget[0] == pytest.approx(4e-6)


class TestShrink:
    """Tests for shrink_with()."""

    def test_moves_toward_anchor(self):
        """Test halving toward 0 stops before the violation drops below the floor."""
        check = _uniform_check(_below(0.1))
        ce = check.counterexample(np.array([0.9]))
        shrunk = shrink_with(check, ce, CheckConfig(shrink_floor=0.25))
        assert shrunk.witness[0][0] == pytest.approx(0.45)
        assert shrunk.violation == pytest.approx(0.35)

    def test_insignificant_unchanged(self):
        check = _uniform_check(_below(0.1, budget=5.0))
        ce = check.counterexample(np.array([0.9]))
        assert shrink_with(check, ce, CheckConfig()) is ce

    def test_respects_feasibility(self):
        """Test moves that break the extra constraint are rejected."""
        check = _uniform_check(_below(0.1), extra=lambda rows: rows[:, 0] >= 0.5)
        ce = check.counterexample(np.array([0.9]))
        assert shrink_with(check, ce, CheckConfig(shrink_floor=0.25)) is ce

    def test_direct_counterexample_stays_significant(self, make_generator):
        """Test x = (100, 1), y = (1, 100) for the square-root mean."""
        g = make_generator("power(0.5)")
        cfg = CheckConfig(samples=10)
        check = direct_check(g, cfg)
        ce = check.counterexample(np.array([100.0, 1.0, 1.0, 100.0]))
        assert ce.violation == pytest.approx(101.0 - 2 * 30.25)
        shrunk = shrink_with(check, ce, cfg)
        assert shrunk.significant
        assert shrunk.violation >= cfg.shrink_floor * ce.violation
        flat = [v for part in shrunk.witness for v in part]
        assert all(g.lo <= v <= g.hi / 2 for v in flat)

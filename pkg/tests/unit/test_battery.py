"""Unit tests for the checker battery and its resolution."""

import pytest

from meanscope.core.battery import EQUIVALENCE_STAGE, NECESSARY_STAGE, resolve, run_battery
from meanscope.models.verdict import Resolution, Role, Status, Verdict


def _verdict(checker_id: str, role: Role, status: Status) -> Verdict:
    return Verdict(id=checker_id, role=role, status=status)


def _equivalence(*statuses: Status):
    return [_verdict(cid, Role.EQUIVALENCE, s) for cid, s in zip(EQUIVALENCE_STAGE, statuses)]


def _necessary(*statuses: Status):
    return [_verdict(cid, Role.NECESSARY, s) for cid, s in zip(NECESSARY_STAGE, statuses)]


PASS, FAIL, UNDECIDED = Status.PASS, Status.FAIL, Status.INCONCLUSIVE
ALL_PASS = (PASS,) * 4
ALL_FAIL = (FAIL,) * 4


class TestResolve:
    """Tests for resolve()."""

    def test_all_pass(self):
        resolution, details = resolve(_necessary(*ALL_PASS) + _equivalence(*ALL_PASS))
        assert resolution == Resolution.SUBADDITIVE
        assert details is None

    def test_all_fail(self):
        resolution, _ = resolve(_necessary(FAIL, PASS, PASS, PASS) + _equivalence(*ALL_FAIL))
        assert resolution == Resolution.NOT_SUBADDITIVE

    def test_split_equivalence_is_disagreement(self):
        """Test a Pass and a Fail among equivalent conditions."""
        resolution, details = resolve(_equivalence(PASS, FAIL, PASS, PASS))
        assert resolution == Resolution.DISAGREEMENT
        assert "direct=pass" in details
        assert "phi=fail" in details

    def test_necessary_fail_with_all_equivalent_pass(self):
        resolution, details = resolve(_necessary(PASS, PASS, FAIL, PASS) + _equivalence(*ALL_PASS))
        assert resolution == Resolution.DISAGREEMENT
        assert "f_convex=fail" in details

    def test_validator_fail_with_all_equivalent_pass(self):
        verdicts = _equivalence(*ALL_PASS) + [_verdict("eq546", Role.VALIDATOR, FAIL)]
        assert resolve(verdicts)[0] == Resolution.DISAGREEMENT

    def test_fail_with_inconclusive_is_not_subadditive(self):
        resolution, _ = resolve(_equivalence(FAIL, UNDECIDED, FAIL, FAIL))
        assert resolution == Resolution.NOT_SUBADDITIVE

    def test_pass_with_inconclusive(self):
        resolution, _ = resolve(_necessary(*ALL_PASS) + _equivalence(PASS, UNDECIDED, PASS, PASS))
        assert resolution == Resolution.INCONCLUSIVE

    def test_auxiliary_ignored(self):
        """Test Jensen convexity and ratio convexity never change the resolution."""
        verdicts = _equivalence(*ALL_PASS) + [
            _verdict("jensen_convexity", Role.AUXILIARY, FAIL),
            _verdict("ratio_convex", Role.AUXILIARY, FAIL),
        ]
        assert resolve(verdicts)[0] == Resolution.SUBADDITIVE

    def test_empty(self):
        assert resolve([])[0] == Resolution.INCONCLUSIVE


class TestRunBattery:
    """Tests for run_battery() on generators with known answers."""

    def test_power2_subadditive(self, power2, fast_config):
        report = run_battery(power2, fast_config)
        assert report.resolution == Resolution.SUBADDITIVE
        assert len(report.verdicts) == 11
        assert report.alpha.unbounded
        assert report.convexity_consistent is True
        assert not report.short_circuited

    def test_exp_not_subadditive(self, exp1, fast_config):
        """Test every necessary condition passes while every equivalent one fails."""
        report = run_battery(exp1, fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE
        for checker_id in NECESSARY_STAGE:
            assert report.verdict(checker_id).passed, checker_id
        for checker_id in EQUIVALENCE_STAGE:
            assert report.verdict(checker_id).failed, checker_id
        assert report.verdict("eq546").failed

    def test_log_not_subadditive(self, make_generator, fast_config):
        report = run_battery(make_generator("log"), fast_config)
        assert report.resolution == Resolution.NOT_SUBADDITIVE
        assert not report.alpha.pattern_ok
        assert report.details is None

    def test_short_circuit(self, make_generator, fast_config):
        """Test a failed necessary condition stops the run."""
        cfg = fast_config.model_copy(update={"short_circuit": True})
        report = run_battery(make_generator("power(0.5)"), cfg)
        assert report.short_circuited
        assert report.resolution == Resolution.NOT_SUBADDITIVE
        assert [v.id for v in report.verdicts] == ["ma_bound"]
        assert report.convexity_consistent is None

    @pytest.mark.parametrize("text", ["power(2)", "exp(1)"])
    def test_decreasing_twin(self, make_generator, fast_config, text):
        """Test affine(-1, 0, f) resolves like f."""
        plain = run_battery(make_generator(text), fast_config)
        twin = run_battery(make_generator(f"affine(-1, 0, {text})"), fast_config)
        assert twin.resolution == plain.resolution

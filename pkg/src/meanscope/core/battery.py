"""Run every checker on one generator and resolve the verdicts into a single answer."""

import logging
from typing import List, Optional, Tuple

from meanscope.config.settings import CheckConfig
from meanscope.core import checkers
from meanscope.core.generators import canonicalize
from meanscope.core.semidiff import find_alpha
from meanscope.models.generator import Generator
from meanscope.models.verdict import BatteryReport, Resolution, Role, Status, Verdict

logger = logging.getLogger(__name__)

NECESSARY_STAGE = (
    checkers.MA_BOUND,
    checkers.LOGCONCAVE,
    checkers.F_CONVEX,
    checkers.SHIFT_RATIO,
)
EQUIVALENCE_STAGE = (checkers.DIRECT, checkers.PHI, checkers.PSI, checkers.CRITERION_V)


def _statuses(verdicts: List[Verdict], role: Role) -> List[Verdict]:
    return [v for v in verdicts if v.role == role]


def _describe(verdicts: List[Verdict]) -> str:
    return ", ".join(f"{v.id}={v.status.value}" for v in verdicts)


def resolve(verdicts: List[Verdict]) -> Tuple[Resolution, Optional[str]]:
    """
    Agreement resolution over the verdicts that take part in it.

    Auxiliary and comparison verdicts are ignored. Equivalence checkers that
    split between Pass and Fail, or all Passing while a necessary condition or
    the validator Fails, give Disagreement.

    Returns:
        (resolution, details) with details set for Disagreement only
    """
    equivalence = _statuses(verdicts, Role.EQUIVALENCE)
    others = _statuses(verdicts, Role.NECESSARY) + _statuses(verdicts, Role.VALIDATOR)
    relevant = equivalence + others

    passed = [v for v in equivalence if v.passed]
    failed = [v for v in equivalence if v.failed]
    if passed and failed:
        details = (
            f"equivalent conditions disagree: {_describe(passed)} but {_describe(failed)}"
        )
        return Resolution.DISAGREEMENT, details
    if equivalence and len(passed) == len(equivalence):
        contradicted = [v for v in others if v.failed]
        if contradicted:
            details = (
                f"all equivalent conditions pass but {_describe(contradicted)}"
            )
            return Resolution.DISAGREEMENT, details

    if any(v.failed for v in relevant):
        return Resolution.NOT_SUBADDITIVE, None
    if relevant and all(v.passed for v in relevant):
        return Resolution.SUBADDITIVE, None
    return Resolution.INCONCLUSIVE, None


def _convexity_agreement(verdicts: List[Verdict]) -> Optional[bool]:
    jensen = next((v for v in verdicts if v.id == checkers.JENSEN), None)
    ratio = next((v for v in verdicts if v.id == checkers.RATIO_CONVEX), None)
    if jensen is None or ratio is None or ratio.status == Status.INCONCLUSIVE:
        return None
    if jensen.status == Status.INCONCLUSIVE:
        return None
    return jensen.status == ratio.status


def run_battery(g: Generator, cfg: CheckConfig) -> BatteryReport:
    """
    Run the necessary conditions, the four equivalent conditions, the validator
    and the convexity auxiliaries on ``g``.

    With ``cfg.short_circuit`` a failed necessary condition stops the run and
    resolves NotSubadditive right away.
    """
    g = canonicalize(g)
    alpha = find_alpha(g, cfg.scan_points)
    logger.info("alpha = %s (pattern_ok=%s)", alpha.describe(), alpha.pattern_ok)

    verdicts: List[Verdict] = []

    def run(checker_id: str, **kwargs) -> Verdict:
        logger.info("Running %s", checker_id)
        verdict = checkers.CHECKERS[checker_id](g, cfg, **kwargs)
        logger.info("%s: %s after %d samples", checker_id, verdict.status.value, verdict.samples_run)
        verdicts.append(verdict)
        return verdict

    for checker_id in NECESSARY_STAGE:
        verdict = run(checker_id)
        if verdict.failed and cfg.short_circuit:
            logger.warning("Necessary condition %s failed; skipping the remaining checkers", checker_id)
            return BatteryReport(
                verdicts=verdicts,
                alpha=alpha,
                resolution=Resolution.NOT_SUBADDITIVE,
                short_circuited=True,
            )

    for checker_id in EQUIVALENCE_STAGE:
        if checker_id == checkers.CRITERION_V:
            run(checker_id, alpha=alpha)
        else:
            run(checker_id)
    run(checkers.EQ546)
    run(checkers.JENSEN)
    run(checkers.RATIO_CONVEX)

    resolution, details = resolve(verdicts)
    if resolution == Resolution.DISAGREEMENT:
        logger.warning("Disagreement: %s", details)
    return BatteryReport(
        verdicts=verdicts,
        alpha=alpha,
        resolution=resolution,
        details=details,
        convexity_consistent=_convexity_agreement(verdicts),
    )

"""Greedy counterexample shrinking."""

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from meanscope.config.settings import CheckConfig
from meanscope.models.verdict import Counterexample

if TYPE_CHECKING:
    from meanscope.core.harness import Check

logger = logging.getLogger(__name__)

MAX_SWEEPS = 200


def _flatten(ce: Counterexample) -> np.ndarray:
    return np.array([v for part in ce.witness for v in part], dtype=float)


def _toward(check: "Check", row: np.ndarray, k: int) -> float:
    """Coordinate k moved halfway to its anchor (in log scale for positive coordinates)."""
    if check.log_coords[k]:
        return float(np.sqrt(row[k] * check.anchor[k]))
    return float(0.5 * (row[k] + check.anchor[k]))


def shrink_with(check: "Check", ce: Counterexample, cfg: CheckConfig) -> Counterexample:
    """
    Move witness coordinates toward their anchors while the violation stays significant.

    A move is kept when the moved witness is feasible for the check, its
    violation exceeds its own error budget, and it keeps at least
    ``cfg.shrink_floor`` of the initial violation. At most MAX_SWEEPS sweeps
    over the coordinates; a sweep without accepted moves ends the search.

    Returns:
        A counterexample for the final witness (``ce`` itself when nothing moved)
    """
    if not ce.significant:
        return ce
    row = _flatten(ce)
    floor = cfg.shrink_floor * ce.violation
    best: Optional[Counterexample] = None
    for sweep in range(MAX_SWEEPS):
        moved = False
        for k in range(row.size):
            target = _toward(check, row, k)
            if target == row[k]:
                continue
            candidate = row.copy()
            candidate[k] = target
            if not check.feasible(candidate[None, :])[0]:
                continue
            m = check.safe_measure(candidate[None, :])
            if not m.valid[0]:
                continue
            violation = float(m.lhs[0] - m.rhs[0])
            if violation > float(m.budget[0]) and violation >= floor:
                row = candidate
                moved = True
        if not moved:
            logger.debug("%s: shrink settled after %d sweeps", check.id, sweep + 1)
            break
        best = check.counterexample(row, ce.sample_index)
    if best is None:
        return ce
    return best

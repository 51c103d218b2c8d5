"""Sampling harness shared by the checkers.

A check draws witness rows from a named counter-based stream and measures
lhs, rhs and an error budget per row; ``lhs > rhs + budget`` is a violation.
Rows are drawn in fixed chunks keyed by (seed, stream, chunk index), and chunk
summaries are reduced in chunk order, so results do not depend on the number
of worker threads.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from meanscope.config.settings import CheckConfig
from meanscope.core.shrink import shrink_with
from meanscope.models.errors import MeanscopeError
from meanscope.models.verdict import Counterexample, Role, Status, Verdict
from meanscope.utils.parallel import map_chunks
from meanscope.utils.sampling import chunk_counts, stream

logger = logging.getLogger(__name__)

RETRY_ROUNDS = 3


class Measured(NamedTuple):
    """Both sides of an inequality for a batch of witness rows."""

    lhs: np.ndarray
    rhs: np.ndarray
    budget: np.ndarray
    valid: np.ndarray


@dataclass
class Check:
    """One sampled inequality ``lhs <= rhs``."""

    id: str
    kind: str
    role: Role
    labels: List[str]
    layout: List[int]
    draw: Callable[[np.random.Generator, int], np.ndarray]
    measure: Callable[[np.ndarray], Measured]
    lower: np.ndarray
    upper: np.ndarray
    anchor: np.ndarray
    log_coords: np.ndarray
    extra: Optional[Callable[[np.ndarray], np.ndarray]] = None
    stream_name: str = field(default="")

    def __post_init__(self):
        if not self.stream_name:
            self.stream_name = self.id

    def feasible(self, rows: np.ndarray) -> np.ndarray:
        ok = np.all((rows >= self.lower) & (rows <= self.upper), axis=1)
        if self.extra is not None:
            ok &= self.extra(rows)
        return ok

    def split(self, row: np.ndarray) -> List[List[float]]:
        """Flat witness row -> witness parts in ``layout``."""
        parts, start = [], 0
        for size in self.layout:
            parts.append([float(v) for v in row[start : start + size]])
            start += size
        return parts

    def counterexample(self, row: np.ndarray, index: int = -1) -> Optional[Counterexample]:
        m = self.safe_measure(row[None, :])
        if not m.valid[0]:
            return None
        lhs, rhs, budget = float(m.lhs[0]), float(m.rhs[0]), float(m.budget[0])
        return Counterexample(
            kind=self.kind,
            witness=self.split(row),
            labels=list(self.labels),
            lhs=lhs,
            rhs=rhs,
            violation=lhs - rhs,
            err_budget=budget,
            sample_index=index,
        )

    def safe_measure(self, rows: np.ndarray) -> Measured:
        """measure() with evaluation failures turned into invalid rows."""
        count = rows.shape[0]
        try:
            with np.errstate(all="ignore"):
                m = self.measure(rows)
        except MeanscopeError as exc:
            logger.warning("%s: %d samples could not be evaluated (%s)", self.id, count, exc)
            nan = np.full(count, np.nan)
            return Measured(nan, nan, nan, np.zeros(count, dtype=bool))
        valid = m.valid & np.isfinite(m.lhs) & np.isfinite(m.rhs) & np.isfinite(m.budget)
        return Measured(m.lhs, m.rhs, m.budget, valid)


@dataclass
class Summary:
    """Reduction state over chunks."""

    min_margin: float = np.inf
    valid: int = 0
    invalid: int = 0
    worst_violation: float = -np.inf
    worst_index: int = -1
    worst_row: Optional[np.ndarray] = None

    def merge(self, other: "Summary") -> "Summary":
        self.min_margin = min(self.min_margin, other.min_margin)
        self.valid += other.valid
        self.invalid += other.invalid
        if other.worst_row is not None and (
            other.worst_violation > self.worst_violation
            or (
                other.worst_violation == self.worst_violation
                and other.worst_index < self.worst_index
            )
        ):
            self.worst_violation = other.worst_violation
            self.worst_index = other.worst_index
            self.worst_row = other.worst_row
        return self


def summarize(check: Check, rows: np.ndarray, base_index: int) -> Summary:
    """Evaluate one chunk of witness rows."""
    m = check.safe_measure(rows)
    summary = Summary(valid=int(m.valid.sum()), invalid=int((~m.valid).sum()))
    if summary.valid:
        margin = (m.rhs - m.lhs)[m.valid]
        summary.min_margin = float(margin.min())
    violation = np.where(m.valid, m.lhs - m.rhs, -np.inf)
    significant = m.valid & (violation > m.budget)
    if significant.any():
        local = int(np.argmax(np.where(significant, violation, -np.inf)))
        summary.worst_violation = float(violation[local])
        summary.worst_index = base_index + local
        summary.worst_row = rows[local].copy()
    return summary


def sample(check: Check, cfg: CheckConfig, samples: Optional[int] = None) -> Summary:
    """Draw and evaluate ``samples`` rows (default cfg.samples), retrying invalid rows."""
    total = cfg.samples if samples is None else samples

    def chunk_work(stream_name: str, offset: int):
        def work(index: int, count: int) -> Summary:
            rng = stream(cfg.seed, stream_name, index)
            rows = check.draw(rng, count)
            return summarize(check, rows, offset + index * cfg.chunk_size)

        return work

    counts = chunk_counts(total, cfg.chunk_size)
    result = Summary()
    for part in map_chunks(chunk_work(check.stream_name, 0), counts, cfg.threads):
        result.merge(part)

    drawn = total
    for round_ in range(1, RETRY_ROUNDS + 1):
        if result.invalid == 0 or result.worst_row is not None:
            break
        missing = result.invalid
        logger.info("%s: redrawing %d samples (round %d)", check.id, missing, round_)
        result.invalid = 0
        name = f"{check.stream_name}/retry{round_}"
        for part in map_chunks(chunk_work(name, drawn), chunk_counts(missing, cfg.chunk_size), cfg.threads):
            result.merge(part)
        drawn += missing
    return result


def verdict_from(
    check: Check,
    summary: Summary,
    cfg: CheckConfig,
    verdict_id: Optional[str] = None,
    role: Optional[Role] = None,
) -> Verdict:
    """Turn a reduced summary into a Verdict, shrinking the worst witness on failure."""
    verdict_id = verdict_id or check.id
    role = role or check.role
    margin = None if summary.valid == 0 else summary.min_margin
    samples_run = summary.valid + summary.invalid
    if summary.worst_row is not None:
        ce = check.counterexample(summary.worst_row, summary.worst_index)
        if ce is not None:
            ce = shrink_with(check, ce, cfg)
            logger.debug("%s: fail, violation %.3g", verdict_id, ce.violation)
            return Verdict(
                id=verdict_id,
                role=role,
                status=Status.FAIL,
                min_margin=margin,
                samples_run=samples_run,
                counterexample=ce,
            )
    if summary.invalid:
        return Verdict(
            id=verdict_id,
            role=role,
            status=Status.INCONCLUSIVE,
            min_margin=margin,
            samples_run=samples_run,
            note=f"{summary.invalid} samples could not be evaluated",
        )
    return Verdict(
        id=verdict_id, role=role, status=Status.PASS, min_margin=margin, samples_run=samples_run
    )


def run_check(check: Check, cfg: CheckConfig, samples: Optional[int] = None) -> Verdict:
    logger.debug("Running %s with %d samples", check.id, cfg.samples if samples is None else samples)
    return verdict_from(check, sample(check, cfg, samples), cfg)


def relative_budget(cfg: CheckConfig, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """tol_rel (1 + |lhs| + |rhs|)."""
    return cfg.tol_rel * (1.0 + np.abs(lhs) + np.abs(rhs))

"""Check and run configuration."""

import logging
import os
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from meanscope.models.generator import Window

logger = logging.getLogger(__name__)

THREADS_ENV = "MEANSCOPE_THREADS"

DEFAULT_WINDOW = Window(lo=1e-3, hi=1e3)
DEFAULT_SAMPLES = 10_000
DEFAULT_ARITY = 2
DEFAULT_SEED = 0
DEFAULT_TOL_REL = 1e-9
MONOTONE_GRID_POINTS = 513
SCAN_GRID_POINTS = 2049


def threads_from_env() -> int:
    """Worker cap from MEANSCOPE_THREADS (1 when unset or invalid)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return 1
    if value < 1:
        logger.warning("Ignoring %s=%r: must be positive", THREADS_ENV, raw)
        return 1
    return value


class CheckConfig(BaseModel):
    """Sampling configuration shared by all checkers.

    Verdicts depend only on (generator, window, samples, arity, seed, tol_rel,
    shrink_floor, chunk_size); threads change the schedule, never the result.
    """

    model_config = ConfigDict(frozen=True)

    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)
    arity: int = Field(default=DEFAULT_ARITY, ge=2)
    window: Window = Field(default=DEFAULT_WINDOW)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    tol_rel: float = Field(default=DEFAULT_TOL_REL, gt=0.0)
    shrink_floor: float = Field(default=0.25, gt=0.0, le=1.0)
    chunk_size: int = Field(default=1024, ge=1)
    threads: int = Field(default_factory=threads_from_env, ge=1)
    short_circuit: bool = False
    scan_points: int = Field(default=SCAN_GRID_POINTS, ge=5)
    monotone_points: int = Field(default=MONOTONE_GRID_POINTS, ge=3)


class Command(str, Enum):
    """CLI commands that produce reports."""

    MEAN = "mean"
    CHECK = "check"
    ALPHA = "alpha"
    BATTERY = "battery"
    COMPARE = "compare"
    KINKS = "kinks"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class RunConfig(BaseModel):
    """Fully resolved CLI invocation, embedded in every report."""

    command: Command
    generators: List[str] = Field(..., min_length=1)
    window: Window = Field(default=DEFAULT_WINDOW)
    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)
    arity: int = Field(default=DEFAULT_ARITY, ge=2)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    tol_rel: float = Field(default=DEFAULT_TOL_REL, gt=0.0)
    output: OutputFormat = OutputFormat.TEXT
    points: Optional[List[float]] = Field(None, description="Sample vector for 'mean'")
    checker: Optional[str] = Field(None, description="Checker id for 'check'")
    short_circuit: bool = False
    numeric: bool = Field(False, description="Ignore closed-form derivatives")

    def check_config(self, threads: Optional[int] = None) -> CheckConfig:
        """CheckConfig carrying the reproducibility-relevant fields."""
        extra = {} if threads is None else {"threads": threads}
        return CheckConfig(
            samples=self.samples,
            arity=self.arity,
            window=self.window,
            seed=self.seed,
            tol_rel=self.tol_rel,
            short_circuit=self.short_circuit,
            **extra,
        )

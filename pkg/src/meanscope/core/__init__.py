"""Core functionality for meanscope."""

from meanscope.core.battery import resolve, run_battery
from meanscope.core.checkers import CHECKERS, compare_means, shrink
from meanscope.core.generators import build, canonicalize, evaluate
from meanscope.core.means import invert, power_mean, qa_mean
from meanscope.core.parser import parse_generator, pretty
from meanscope.core.semidiff import d1_side, d2_side, detect_kinks, find_alpha

__all__ = [
    "CHECKERS",
    "build",
    "canonicalize",
    "compare_means",
    "d1_side",
    "d2_side",
    "detect_kinks",
    "evaluate",
    "find_alpha",
    "invert",
    "parse_generator",
    "power_mean",
    "pretty",
    "qa_mean",
    "resolve",
    "run_battery",
    "shrink",
]

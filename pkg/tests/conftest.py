"""Shared pytest fixtures for meanscope tests."""

from typing import Callable, Optional

import pytest
from typer.testing import CliRunner

from meanscope.config.settings import CheckConfig
from meanscope.core.generators import build
from meanscope.core.parser import parse_generator, simplify_spec
from meanscope.models.generator import Generator, Window


@pytest.fixture
def cli_runner():
    """Typer CliRunner for CLI tests."""
    return CliRunner()


@pytest.fixture
def make_generator() -> Callable[..., Generator]:
    """
    Factory fixture building a generator from DSL text.

    Usage:
        g = make_generator("power(2)")
        g = make_generator("exp(1)", window=Window(lo=0.1, hi=10))
    """

    def _make(text: str, window: Optional[Window] = None, analytic: bool = True) -> Generator:
        return build(simplify_spec(parse_generator(text)), window, analytic=analytic)

    return _make


@pytest.fixture
def power2(make_generator) -> Generator:
    return make_generator("power(2)")


@pytest.fixture
def exp1(make_generator) -> Generator:
    return make_generator("exp(1)")


@pytest.fixture
def quadlin1(make_generator) -> Generator:
    return make_generator("quadlin(1)")


@pytest.fixture
def two_piece(make_generator) -> Generator:
    """2x + |x - 1| on the default window."""
    return make_generator("spline(1; 1, 3; 0, 0)")


@pytest.fixture
def fast_config() -> CheckConfig:
    """Checker configuration with fewer samples for quick unit runs."""
    return CheckConfig(samples=2000, seed=7)


@pytest.fixture
def small_window() -> Window:
    return Window(lo=0.1, hi=10.0)

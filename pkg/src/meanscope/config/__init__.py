"""Configuration management for meanscope."""

from meanscope.config.settings import (
    DEFAULT_WINDOW,
    THREADS_ENV,
    CheckConfig,
    Command,
    OutputFormat,
    RunConfig,
    threads_from_env,
)

__all__ = [
    "DEFAULT_WINDOW",
    "THREADS_ENV",
    "CheckConfig",
    "Command",
    "OutputFormat",
    "RunConfig",
    "threads_from_env",
]

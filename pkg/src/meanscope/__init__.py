"""Subadditivity checks for quasi-arithmetic means."""

__version__ = "1.0.0"

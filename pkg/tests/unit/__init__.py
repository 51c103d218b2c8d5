"""Unit tests for meanscope."""

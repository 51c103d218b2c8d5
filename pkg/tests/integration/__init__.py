"""Integration tests for meanscope."""

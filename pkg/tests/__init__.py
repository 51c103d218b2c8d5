"""Tests for meanscope."""

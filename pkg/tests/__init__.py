"""Tests for qkpc."""

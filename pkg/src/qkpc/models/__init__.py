"""Data models for qkpc."""

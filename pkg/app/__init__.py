"""Desk-scale simulator of a chaotic quantum SAT amplifier."""

__version__ = "1.0.0"

"""Balancing straight-line programs and navigating compressed strings and forests."""

__version__ = "0.1.0"

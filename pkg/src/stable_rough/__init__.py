"""Pathwise integration against the local time of symmetric stable processes."""

__version__ = "0.1.0"

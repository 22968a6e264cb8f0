"""Greedy list-based multiuser detection and relay selection for cooperative DS-CDMA."""

__version__ = "0.1.0"

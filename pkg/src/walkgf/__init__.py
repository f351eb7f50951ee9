"""Exact generating functions for walks between two absorbing barriers."""

__version__ = "0.1.0"

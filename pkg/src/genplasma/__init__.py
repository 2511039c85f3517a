"""Exact solvability toolkit for the two-component generalized circular plasma."""

__version__ = "0.1.0"

"""Weighted Pascal graphs: dimensions, probability functions, boundaries and Monte Carlo."""

__version__ = "0.1.0"

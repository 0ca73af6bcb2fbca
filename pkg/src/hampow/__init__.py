"""Exact combinatorics and simulation for spanning powers of Hamilton cycles in random graphs."""

__version__ = "0.1.0"

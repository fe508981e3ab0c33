"""Exact entropy inequalities for sums and products over F_p and Q."""

__version__ = "0.1.0"

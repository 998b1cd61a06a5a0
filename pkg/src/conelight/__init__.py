"""Numerical checks for light-cone charge transport and radiation fields."""

__version__ = "0.1.0"

"""Numerical toolkit for regulators of modular units on X_1(N)."""

__version__ = "0.1.0"

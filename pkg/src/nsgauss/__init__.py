"""Nonsingular Gaussian actions: numerical constructions and checks."""

__version__ = "0.1.0"

"""Numerical tensor calculus on hypersurfaces of space forms."""

__version__ = "0.1.0"

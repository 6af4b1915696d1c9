"""Pseudospectral tools for the forced fractional Fujita problem."""

__version__ = "0.1.0"

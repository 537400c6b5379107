"""Numerical workbench for Orlicz bumps, sparse domination and iterated commutators."""

__version__ = "0.1.0"

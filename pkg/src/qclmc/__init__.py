"""Quasi continuous level Monte Carlo (QCLMC) and its pseudo-random twin."""

__version__ = "0.1.0"

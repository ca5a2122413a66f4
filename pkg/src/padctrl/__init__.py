"""Perturbative photoionization anisotropy toolkit."""

__version__ = "0.1.0"

"""Quantum scattering diagrams, broken lines, theta functions and tropical counts."""

__version__ = "0.1.0"

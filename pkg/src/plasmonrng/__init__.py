"""Simulation and statistical validation of a branching-path plasmonic QRNG."""

__version__ = "0.1.0"

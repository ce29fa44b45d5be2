"""Simulation and verification of multiradial SLE with spiral."""

__version__ = "0.1.0"

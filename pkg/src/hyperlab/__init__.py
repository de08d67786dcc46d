"""Radial spectral laboratory for the Schroedinger equation on H^3 and R^3."""

__version__ = "0.1.0"

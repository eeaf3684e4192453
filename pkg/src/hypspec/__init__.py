"""Spectral workbench for hyperbolic surfaces built from pants decompositions."""

__version__ = "0.1.0"

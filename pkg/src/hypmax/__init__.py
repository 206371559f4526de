"""Maximal operators over isometry-invariant triangle families in the hyperbolic plane."""

__version__ = "0.1.0"

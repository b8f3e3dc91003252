"""Symplectic spinor fibers, heat-trace coefficients and spectral distances."""

__version__ = "0.1.0"

"""Stencil calculus, continuum kernels and spectral analysis."""

"""Invariant and equivariant finite-dimensional approximators."""

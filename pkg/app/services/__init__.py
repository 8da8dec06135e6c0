"""Numerical services: grids, operators, networks and codecs."""

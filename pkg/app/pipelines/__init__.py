"""Experiment workflows."""

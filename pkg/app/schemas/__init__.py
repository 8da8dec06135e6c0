"""Schemas package for data models."""

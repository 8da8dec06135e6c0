"""Core package for system configuration and infrastructure."""

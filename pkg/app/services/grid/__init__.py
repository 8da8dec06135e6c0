"""Grid and signal services."""

"""Basic and downsampled convnets."""

"""Charge-conserving SE(2)-equivariant convnet."""

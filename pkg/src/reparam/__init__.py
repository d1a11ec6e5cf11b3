"""Reparametrization-invariant mechanics: canonical homogeneous Lagrangians,
gauge-fixed dynamics and diffeomorphism-invariant brane actions."""

__version__ = "0.1.0"

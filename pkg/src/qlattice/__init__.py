"""Entanglement-enhanced quantum games on 2D lattices of agents."""

__version__ = "0.1.0"

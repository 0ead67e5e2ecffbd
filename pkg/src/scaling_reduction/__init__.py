"""Scaling and standard symmetry reduction of Hamiltonian systems in local charts."""

__version__ = "0.1.0"

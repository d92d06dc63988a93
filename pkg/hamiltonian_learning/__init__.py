"""Quantum Hamiltonian learning: SMC inference with simulated (interactive) likelihood evaluation."""

__version__ = "0.1.0"

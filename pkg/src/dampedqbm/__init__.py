"""Quantum Brownian motion in a damped Caldeira-Leggett environment."""

__version__ = "0.1.0"

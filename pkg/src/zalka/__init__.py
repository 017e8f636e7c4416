"""Noisy split-operator Schrödinger simulation on a simulated qubit register."""

__version__ = "0.1.0"

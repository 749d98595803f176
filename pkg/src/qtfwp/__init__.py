"""Quantum-Train fast weight programmers on a statevector simulator."""

__version__ = "0.1.0"

"""Josephson phase-slip qubit circuit simulation toolkit."""

__version__ = "0.1.0"

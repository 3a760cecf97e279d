"""Deterministic hand-driven remote-object manipulation sandbox."""

__version__ = "0.1.0"

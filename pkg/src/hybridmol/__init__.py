"""Hybrid-granularity molecule decomposition, reconstruction and evaluation tools."""

__version__ = "0.1.0"

"""Enumerative sphere shaping toolkit with a PAS link simulator."""

__version__ = "0.1.0"

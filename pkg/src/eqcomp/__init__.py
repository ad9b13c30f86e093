"""Doctrines, their elementary quotient completion, and a realizability toolkit."""

__version__ = "0.1.0"

"""Formal coverage closure: find holes, generate SVA, prove, repeat."""

__version__ = "0.1.0"

"""Attribute inference from short smartphone sensor recordings."""
__version__ = "0.1.0"

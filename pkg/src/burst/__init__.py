"""Burst: threshold-gated content propagation between bounded channels."""

__version__ = "0.1.0"

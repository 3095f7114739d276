"""Divisor choreography on real plane curves: tracking, tracing and monodromy."""

__version__ = "0.1.0"

"""Certified bounds for the truncated Moebius double sum S_eps(X)."""

__version__ = "0.1.0"

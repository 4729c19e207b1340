"""Exact workbench for cyclic A-infinity algebra over truncated Novikov scalars."""

__version__ = "0.1.0"

"""Vertex percolation laboratory for the binary n-cube."""

__version__ = "0.1.0"

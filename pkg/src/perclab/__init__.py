"""Certified bounds and simulations for 1-independent bond percolation."""

__version__ = "0.1.0"

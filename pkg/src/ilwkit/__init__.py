"""Pseudospectral simulation and inequality checks for the intermediate long wave equation."""

__version__ = "0.1.0"

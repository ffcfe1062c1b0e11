"""Bellman-function verification lab for L^p paraproduct estimates."""

__version__ = "0.1.0"

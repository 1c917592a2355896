"""Exact Fedosov quantization on coordinate charts of Kahler manifolds."""

__version__ = "0.1.0"

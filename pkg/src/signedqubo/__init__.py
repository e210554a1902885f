"""Multi-community detection in signed graphs via QUBO formulations."""

__version__ = "0.1.0"

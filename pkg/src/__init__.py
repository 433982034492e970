"""Finite-resource intersubjectivity: agreement and bias bounds, coarse-graining,
and the central-spin simulator."""

__version__ = "0.1.0"

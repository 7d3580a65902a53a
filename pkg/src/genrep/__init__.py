"""Exact finite models for generic representations of abelian and metric groups."""

__version__ = "0.1.0"

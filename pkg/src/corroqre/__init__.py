"""Quantum resource estimation and cluster-expansion/KMC utilities for alloy corrosion models."""

__version__ = "0.1.0"

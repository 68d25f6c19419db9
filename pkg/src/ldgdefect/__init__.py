"""Landau-de Gennes point-defect experiments on cubic lattices."""

__version__ = "0.1.0"

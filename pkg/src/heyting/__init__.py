"""Finite Heyting algebras, intuitionistic formulas and equation solving."""

__version__ = "0.1.0"

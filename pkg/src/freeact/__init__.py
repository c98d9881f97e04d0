"""Workbench for free actions of finite abelian groups on finite-dimensional
C*-algebras: factor systems, group cohomology, twisting, and bundle realization."""

__version__ = "0.1.0"

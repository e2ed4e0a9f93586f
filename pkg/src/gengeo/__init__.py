"""Exact calculus on T + T*: Courant brackets, spinors, generalized metrics,
generalized complex and Kahler structures, Poisson modules and co-Higgs data."""

from .scalar import Chart, FunctionSymbol, I, ScalarExpr
from .tensor import Frame, MixedForm, PolyVector, su2_frame
from .clifford import GSection

__all__ = ["Chart", "FunctionSymbol", "I", "ScalarExpr", "Frame", "MixedForm", "PolyVector",
           "su2_frame", "GSection"]
__version__ = "0.1.0"

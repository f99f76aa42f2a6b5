"""Quantum logic workbench: formulas, ortholattice and Hilbert-space models,
projective test sequences and unsharp qubit effects."""

from .formula import ParseError, elementaries, parse, render
from .omlattice import OrthoLattice, build_lattice, check_law, standard
from .semantics import classify_law, evaluate, find_countermodel, is_formally_true

__version__ = "0.1.0"

__all__ = [
    "ParseError", "parse", "render", "elementaries",
    "OrthoLattice", "build_lattice", "check_law", "standard",
    "evaluate", "is_formally_true", "find_countermodel", "classify_law",
]

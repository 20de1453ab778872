"""Molecular graph core: parsing, sanitizing, canonical SMILES and 2D layout."""

from __future__ import annotations

from .canon import canonical_ranks, canonical_smiles
from .graph import Atom, Bond, BondOrder, ChemError, ContractError, MolecularGraph, ParseError
from .layout import generate_2d_coords
from .molfile import parse_molfile
from .sanitize import Problem, SanitizeError, diagnose, sanitize
from .smiles import parse_smiles

__all__ = [
    "Atom", "Bond", "BondOrder", "ChemError", "ContractError", "MolecularGraph", "ParseError",
    "Problem", "SanitizeError", "canonical_ranks", "canonical_smiles", "diagnose",
    "generate_2d_coords", "parse_molfile",    "parse_smiles", "sanitize",
]

"""Functional-group dictionary, pattern matching and greedy decomposition."""

from __future__ import annotations

from .decompose import Decomposition, GroupInstance, decompose
from .match import core_atoms, match_template
from .templates import (
    DictionaryError,
    FunctionalGroupTemplate,
    PatternAtom,
    PatternBond,
    default_dictionary,
    load_priority_file,
    load_priority_list,
    parse_fragments,
)

__all__ = [
    "Decomposition", "DictionaryError", "FunctionalGroupTemplate", "GroupInstance",
    "PatternAtom", "PatternBond", "core_atoms", "decompose", "default_dictionary",
    "load_priority_file", "load_priority_list", "match_template", "parse_fragments",
]

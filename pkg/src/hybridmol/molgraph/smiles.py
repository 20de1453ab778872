"""SMILES reader.

Supports the organic subset, bracket atoms (isotope and chirality are read
and dropped), ring closures including ``%nn``, branches, explicit bond
symbols and dot-disconnected components. The canonical writer lives in
:mod:`hybridmol.molgraph.canon`.
"""

from __future__ import annotations

import re
from dataclasses import replace

from .elements import AROMATIC_SUBSET, ORGANIC_SUBSET, is_element
from .graph import Atom, Bond, BondOrder, MolecularGraph, ParseError, default_hydrogens
from .rings import ring_bond_keys

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}

_BRACKET = re.compile(
    r"\[(?P<iso>\d+)?(?P<sym>[A-Z][a-z]?|se|as|te|[bcnops])"
    r"(?P<chi>@@?(?:TH[12]|AL[12]|SP[123]|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<h>H\d*)?(?P<chg>\+\+|--|[+-]\d*)?(?::(?P<cls>\d+))?\]"
)

_AROMATIC_BRACKET = {"b", "c", "n", "o", "p", "s", "se", "as", "te"}


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a SMILES string into an unsanitized graph with hydrogens filled in."""
    if "\n" in text.strip():
        raise ParseError("SMILES must be a single line", text.index("\n"))
    text = text.strip()
    atoms: list[dict] = []
    bonds: dict[frozenset[int], tuple[int, int, BondOrder | None]] = {}
    stack: list[int] = []
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    prev: int | None = None
    pending: BondOrder | None = None
    pending_pos = -1
    pos = 0
    n = len(text)

    def add_bond(a: int, b: int, order: BondOrder | None, at: int):
        key = frozenset((a, b))
        if a == b:
            raise ParseError("ring closure bonds an atom to itself", at)
        if key in bonds:
            raise ParseError("duplicate bond", at)
        bonds[key] = (a, b, order)

    def add_atom(spec: dict, at: int):
        nonlocal prev, pending
        atoms.append(spec)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending, at)
        elif pending is not None:
            raise ParseError("bond symbol with no preceding atom", pending_pos)
        prev = idx
        pending = None

    while pos < n:
        ch = text[pos]
        if ch == "[":
            m = _BRACKET.match(text, pos)
            if not m:
                end = text.find("]", pos)
                raise ParseError(
                    "malformed bracket atom" if end >= 0 else "unclosed bracket atom", pos
                )
            sym = m.group("sym")
            aromatic = sym in _AROMATIC_BRACKET
            element = sym.capitalize() if aromatic else sym
            if not is_element(element):
                raise ParseError(f"unknown element symbol {sym!r}", pos)
            h = m.group("h")
            hcount = 0 if h is None else (int(h[1:]) if len(h) > 1 else 1)
            chg = m.group("chg")
            charge = 0
            if chg:
                if chg in ("++", "--"):
                    charge = 2 if chg[0] == "+" else -2
                else:
                    mag = int(chg[1:]) if len(chg) > 1 else 1
                    charge = mag if chg[0] == "+" else -mag
            if not -4 <= charge <= 4:
                raise ParseError(f"formal charge {charge} out of range", pos)
            add_atom(dict(element=element, charge=charge, explicit_h=hcount,
                          is_aromatic=aromatic), pos)
            pos = m.end()
            continue
        if ch.isalpha() or ch == "*":
            two = text[pos:pos + 2]
            if two in ("Cl", "Br"):
                add_atom(dict(element=two), pos)
                pos += 2
                continue
            if ch in ORGANIC_SUBSET:
                add_atom(dict(element=ch), pos)
            elif ch in AROMATIC_SUBSET:
                add_atom(dict(element=ch.upper(), is_aromatic=True), pos)
            else:
                raise ParseError(f"unknown element symbol {ch!r} outside brackets", pos)
            pos += 1
            continue
        if ch in _BOND_SYMBOLS:
            if pending is not None:
                raise ParseError("two consecutive bond symbols", pos)
            pending = _BOND_SYMBOLS[ch]
            pending_pos = pos
            pos += 1
            continue
        if ch.isdigit() or ch == "%":
            if ch == "%":
                if not text[pos + 1:pos + 3].isdigit() or len(text[pos + 1:pos + 3]) != 2:
                    raise ParseError("'%' must be followed by two digits", pos)
                digit, width = int(text[pos + 1:pos + 3]), 3
            else:
                digit, width = int(ch), 1
            if prev is None:
                raise ParseError("ring-closure digit with no preceding atom", pos)
            if digit in open_rings:
                other, order, _ = open_rings.pop(digit)
                if order is not None and pending is not None and order != pending:
                    raise ParseError(f"conflicting bond symbols on ring closure {digit}", pos)
                add_bond(other, prev, pending or order, pos)
            else:
                open_rings[digit] = (prev, pending, pos)
            pending = None
            pos += width
            continue
        if ch == "(":
            if prev is None:
                raise ParseError("branch opened with no preceding atom", pos)
            if pending is not None:
                raise ParseError("bond symbol before branch", pos)
            stack.append(prev)
            pos += 1
            continue
        if ch == ")":
            if not stack:
                raise ParseError("unmatched ')'", pos)
            if pending is not None:
                raise ParseError("dangling bond symbol", pending_pos)
            prev = stack.pop()
            pos += 1
            continue
        if ch == ".":
            if pending is not None:
                raise ParseError("dangling bond symbol", pending_pos)
            prev = None
            pos += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", pos)

    if stack:
        raise ParseError("unmatched '('", text.rfind("("))
    if open_rings:
        digit, (_, _, at) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise ParseError(f"unclosed ring-closure digit {digit}", at)
    if pending is not None:
        raise ParseError("dangling bond symbol", pending_pos)

    atom_objs = tuple(Atom(index=i, **spec) for i, spec in enumerate(atoms))
    bond_objs = []
    for a, b, order in bonds.values():
        if order is None:
            both = atom_objs[a].is_aromatic and atom_objs[b].is_aromatic
            order = BondOrder.AROMATIC if both else BondOrder.SINGLE
        bond_objs.append(Bond(a, b, order))
    graph = MolecularGraph(atom_objs, tuple(bond_objs))
    # An implicit aromatic bond outside any ring (biphenyl written "c1ccccc1c1ccccc1")
    # is a plain single bond.
    rings = ring_bond_keys(graph)
    if any(b.order is BondOrder.AROMATIC and b.key not in rings for b in graph.bonds):
        graph = MolecularGraph(graph.atoms, tuple(
            Bond(b.a, b.b, BondOrder.SINGLE)
            if b.order is BondOrder.AROMATIC and b.key not in rings else b
            for b in graph.bonds
        ))
    return fill_hydrogens(graph)


def fill_hydrogens(graph: MolecularGraph) -> MolecularGraph:
    """Replace every underived hydrogen count by its valence-table default."""
    if all(a.explicit_h is not None for a in graph.atoms):
        return graph
    atoms = [
        a if a.explicit_h is not None else replace(a, explicit_h=default_hydrogens(graph, a.index))
        for a in graph.atoms
    ]
    return graph.with_atoms(atoms)

"""MOL V2000 reader."""

from __future__ import annotations

from dataclasses import replace

from .elements import allowed_valences, is_element
from .graph import Atom, Bond, BondOrder, ChemError, MolecularGraph, ParseError
from .smiles import fill_hydrogens

_BOND_TYPES = {1: BondOrder.SINGLE, 2: BondOrder.DOUBLE, 3: BondOrder.TRIPLE, 4: BondOrder.AROMATIC}
# Atom-block charge column codes.
_CHARGE_CODES = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}


def _int(field: str, line_no: int, what: str) -> int:
    try:
        return int(field)
    except ValueError:
        raise ParseError(f"malformed {what} {field!r}", line_no) from None


def parse_molfile(text: str) -> MolecularGraph:
    """Parse a V2000 block. Hydrogen atoms are folded into their neighbours' counts.

    Error positions are 1-based line numbers.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise ParseError("missing counts line", len(lines) + 1)
    counts = lines[3]
    if "V3000" in counts:
        raise ParseError("V3000 blocks are not supported", 4)
    n_atoms = _int(counts[0:3], 4, "atom count in counts line")
    n_bonds = _int(counts[3:6], 4, "bond count in counts line")
    if len(lines) < 4 + n_atoms + n_bonds:
        raise ParseError("file ends inside the atom/bond block", len(lines) + 1)

    raw_atoms = []
    for k in range(n_atoms):
        line_no = 5 + k
        line = lines[4 + k]
        if len(line) < 34:
            raise ParseError("atom line too short", line_no)
        try:
            x, y = float(line[0:10]), float(line[10:20])
        except ValueError:
            raise ParseError("malformed atom coordinates", line_no) from None
        sym = line[31:34].strip()
        if not is_element(sym):
            raise ParseError(f"unknown element symbol {sym!r}", line_no)
        code = _int(line[36:39] or "0", line_no, "charge code") if len(line) >= 39 else 0
        raw_atoms.append(dict(element=sym, charge=_CHARGE_CODES.get(code, 0), coord_2d=(x, y)))

    raw_bonds = []
    for k in range(n_bonds):
        line_no = 5 + n_atoms + k
        line = lines[4 + n_atoms + k]
        a = _int(line[0:3], line_no, "bond atom index") - 1
        b = _int(line[3:6], line_no, "bond atom index") - 1
        btype = _int(line[6:9], line_no, "bond type")
        stereo = _int(line[9:12], line_no, "bond stereo") if len(line.rstrip()) >= 12 else 0
        if btype not in _BOND_TYPES:
            raise ParseError(f"unsupported bond type {btype}", line_no)
        if not (0 <= a < n_atoms and 0 <= b < n_atoms):
            raise ParseError("bond references a missing atom", line_no)
        order = _BOND_TYPES[btype]
        if order is BondOrder.SINGLE and stereo == 1:
            order = BondOrder.WEDGE
        elif order is BondOrder.SINGLE and stereo == 6:
            order = BondOrder.DASH
        raw_bonds.append((a, b, order, line_no))

    # Properties block: M  CHG overrides atom-block charges.
    chg_seen = False
    for k in range(4 + n_atoms + n_bonds, len(lines)):
        line = lines[k]
        if line.startswith("M  END"):
            break
        if line.startswith("M  CHG"):
            if not chg_seen:
                for a in raw_atoms:
                    a["charge"] = 0
                chg_seen = True
            fields = line[6:].split()
            cnt = _int(fields[0], k + 1, "M  CHG count")
            for p in range(cnt):
                idx = _int(fields[1 + 2 * p], k + 1, "M  CHG atom") - 1
                raw_atoms[idx]["charge"] = _int(fields[2 + 2 * p], k + 1, "M  CHG value")

    # Fold explicit hydrogens into heavy-atom counts.
    is_h = [a["element"] == "H" for a in raw_atoms]
    h_extra = [0] * n_atoms
    keep = [i for i in range(n_atoms) if not is_h[i]]
    if any(is_h):
        for a, b, _, _ in raw_bonds:
            if is_h[a] and not is_h[b]:
                h_extra[b] += 1
            elif is_h[b] and not is_h[a]:
                h_extra[a] += 1
            elif is_h[a] and is_h[b]:
                keep = list(range(n_atoms))  # H2: keep everything explicit
                is_h = [False] * n_atoms
                h_extra = [0] * n_atoms
                break
    new_index = {old: new for new, old in enumerate(keep)}
    aromatic_atoms = {x for a, b, o, _ in raw_bonds if o is BondOrder.AROMATIC for x in (a, b)}

    try:
        atoms = [
            Atom(index=new_index[old], is_aromatic=old in aromatic_atoms, **raw_atoms[old])
            for old in keep
        ]
        bonds = [
            Bond(new_index[a], new_index[b], order)
            for a, b, order, _ in raw_bonds if a in new_index and b in new_index
        ]
        graph = MolecularGraph(tuple(atoms), tuple(bonds))
    except ChemError as exc:
        raise ParseError(str(exc)) from exc

    # Heavy atoms get valence-table hydrogens plus any explicit H atoms that were folded.
    filled = fill_hydrogens(graph)
    if any(h_extra):
        atoms = []
        for old in keep:
            atom = filled.atoms[new_index[old]]
            if h_extra[old]:
                # Explicit H atoms were drawn: use exactly those, plus the default implicit
                # count computed with them attached.
                atom = replace(atom, explicit_h=_with_explicit(graph, new_index[old], h_extra[old]))
            atoms.append(atom)
        filled = filled.with_atoms(atoms)
    return filled


def _with_explicit(graph: MolecularGraph, i: int, n_h: int) -> int:
    atom = graph.atoms[i]
    valences = allowed_valences(atom.element, atom.charge)
    total = graph.bond_sum(i) + n_h
    if valences is None or atom.is_aromatic:
        return n_h
    for v in valences:
        if v >= total:
            return n_h + (v - total)
    return n_h

"""Valence checking, hydrogen finalization and aromaticity perception."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .elements import allowed_valences
from .graph import Bond, BondOrder, ChemError, MolecularGraph
from .rings import ring_bond_keys, sssr
from .smiles import fill_hydrogens

_PI_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})


@dataclass(frozen=True)
class Problem:
    kind: str  # "valence" | "aromatic"
    atoms: tuple[int, ...]
    message: str


class SanitizeError(ChemError):
    """Raised with the full list of problems; nothing is silently repaired."""

    def __init__(self, problems: list[Problem]):
        self.problems = list(problems)
        super().__init__("; ".join(p.message for p in self.problems))


def sanitize(graph: MolecularGraph) -> MolecularGraph:
    """Finalize hydrogens, perceive aromatic rings and check valences.

    Returns the sanitized graph or raises :class:`SanitizeError` whose
    ``problems`` attribute is the diagnostic.
    """
    g = fill_hydrogens(graph)
    g = perceive_aromaticity(g)
    problems = diagnose(g)
    if problems:
        raise SanitizeError(problems)
    return MolecularGraph(g.atoms, g.bonds, sanitized=True, flags=g.flags | _unchecked_flags(g))


def _unchecked_flags(g: MolecularGraph) -> frozenset[str]:
    if any(allowed_valences(a.element, a.charge) is None for a in g.atoms):
        return frozenset({"valence_unchecked"})
    return frozenset()


def diagnose(graph: MolecularGraph) -> list[Problem]:
    """Every valence or aromaticity violation in ``graph`` (empty when valid)."""
    out: list[Problem] = []
    for atom in graph.atoms:
        valences = allowed_valences(atom.element, atom.charge)
        if valences is None:
            continue
        total = graph.bond_sum(atom.index) + graph.hydrogens(atom.index)
        ok = total in valences
        if atom.is_aromatic and not ok:
            # One valence is shared with the pi system.
            ok = (total + 1) in valences
        if not ok:
            out.append(Problem(
                "valence", (atom.index,),
                f"atom {atom.index} ({atom.element}{_charge_str(atom.charge)}) has valence "
                f"{total}, allowed {list(valences)}",
            ))
    rings = ring_bond_keys(graph)
    for bond in graph.bonds:
        if bond.order is not BondOrder.AROMATIC:
            continue
        if bond.key not in rings:
            out.append(Problem("aromatic", (bond.a, bond.b),
                               f"aromatic bond {bond.a}-{bond.b} is not in a ring"))
        elif not (graph.atoms[bond.a].is_aromatic and graph.atoms[bond.b].is_aromatic):
            out.append(Problem("aromatic", (bond.a, bond.b),
                               f"aromatic bond {bond.a}-{bond.b} joins a non-aromatic atom"))
    for atom in graph.atoms:
        if atom.is_aromatic and not any(
            o is BondOrder.AROMATIC for _, o in graph.adjacency[atom.index]
        ):
            out.append(Problem("aromatic", (atom.index,),
                               f"aromatic atom {atom.index} has no aromatic bond"))
    return out


def _charge_str(q: int) -> str:
    if q == 0:
        return ""
    return ("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else "")


def perceive_aromaticity(graph: MolecularGraph) -> MolecularGraph:
    """Mark Kekulé rings that satisfy the 4n+2 rule as aromatic.

    Works ring by ring over the SSSR. A ring atom contributes one electron
    for a double bond to another ring atom whose bond lies in this ring or
    in a ring already found aromatic, zero for an exocyclic C=X or an empty
    p orbital, two for a lone pair (N, O, S, P, carbanion) and disqualifies
    the ring when saturated. Rings already written aromatic are kept.
    Hydrogen counts must be final before calling.
    """
    rings = sssr(graph)
    if not rings:
        return graph
    ring_keys = ring_bond_keys(graph)
    ring_edges = [
        {frozenset((r[k], r[(k + 1) % len(r)])) for k in range(len(r))} for r in rings
    ]
    aromatic_edges: set[frozenset[int]] = {
        b.key for b in graph.bonds if b.order is BondOrder.AROMATIC
    }
    aromatic_rings = {
        k for k, edges in enumerate(ring_edges) if edges <= aromatic_edges
    }
    pre_existing = set(aromatic_rings)
    changed = True
    while changed:
        changed = False
        for k, ring in enumerate(rings):
            if k in aromatic_rings:
                continue
            if _ring_electrons(graph, ring, ring_edges[k], aromatic_edges, ring_keys):
                aromatic_rings.add(k)
                aromatic_edges |= ring_edges[k]
                changed = True
    if aromatic_rings == pre_existing:
        return graph
    new_atoms = set()
    for k in aromatic_rings - pre_existing:
        new_atoms.update(rings[k])
    atoms = [replace(a, is_aromatic=True) if a.index in new_atoms else a for a in graph.atoms]
    bonds = [
        Bond(b.a, b.b, BondOrder.AROMATIC) if b.key in aromatic_edges else b
        for b in graph.bonds
    ]
    return MolecularGraph(tuple(atoms), tuple(bonds), sanitized=False, flags=graph.flags)


def _ring_electrons(graph, ring, edges, aromatic_edges, ring_keys) -> bool:
    total = 0
    for i in ring:
        atom = graph.atoms[i]
        if atom.element not in _PI_ELEMENTS:
            return False
        e = _contribution(graph, i, edges, aromatic_edges, ring_keys)
        if e is None:
            return False
        total += e
    return total % 4 == 2


def _contribution(graph, i, edges, aromatic_edges, ring_keys) -> int | None:
    atom = graph.atoms[i]
    doubles = [(j, o) for j, o in graph.adjacency[i] if o is BondOrder.DOUBLE]
    if atom.is_aromatic:
        # Already aromatic through a neighbouring ring; its pi electron is shared.
        if any(frozenset((i, j)) in aromatic_edges for j, _ in graph.adjacency[i]):
            lone = _lone_pair(graph, i)
            return 2 if lone and not doubles else 1
    if len(doubles) > 1:
        return None
    if doubles:
        j, _ = doubles[0]
        key = frozenset((i, j))
        if key in edges or key in aromatic_edges:
            return 1
        if key in ring_keys:
            return None
        # Exocyclic C=O, C=N, ... leaves an empty p orbital in the ring.
        return 0 if graph.atoms[j].element != "C" else None
    if any(o is BondOrder.TRIPLE for _, o in graph.adjacency[i]):
        return None
    if _lone_pair(graph, i):
        return 2
    if atom.element == "B" or (atom.element == "C" and atom.charge == 1):
        return 0
    return None


def _lone_pair(graph, i) -> bool:
    atom = graph.atoms[i]
    heavy = graph.degree(i) + graph.hydrogens(i)
    if atom.element in ("N", "P") and atom.charge == 0:
        return heavy == 3
    if atom.element in ("O", "S", "Se") and atom.charge == 0:
        return heavy == 2
    if atom.element == "C" and atom.charge == -1:
        return heavy == 3
    return False

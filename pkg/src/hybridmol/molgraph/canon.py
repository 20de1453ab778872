"""Canonical atom ranking and canonical SMILES emission."""

from __future__ import annotations

import sys

from .elements import ORGANIC_SUBSET
from .graph import BondOrder, ContractError, MolecularGraph, default_hydrogens

BOND_CODE = {
    BondOrder.SINGLE: 1,
    BondOrder.WEDGE: 1,
    BondOrder.DASH: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}


def _dense(keys: list) -> list[int]:
    lookup = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [lookup[k] for k in keys]


def _refine(graph: MolecularGraph, ranks: list[int]) -> list[int]:
    adj = graph.adjacency
    while True:
        keys = [
            (ranks[i], tuple(sorted((BOND_CODE[o], ranks[j]) for j, o in adj[i])))
            for i in range(len(ranks))
        ]
        new = _dense(keys)
        if len(set(new)) == len(set(ranks)):
            return new
        ranks = new


def canonical_ranks(graph: MolecularGraph) -> list[int]:
    """A total order on atoms that is invariant under input permutation.

    Seeds are (atomic number, degree, charge, H count, aromatic); classes are
    refined by the sorted (bond order, neighbour class) multiset until
    stable. Remaining ties are broken by promoting the lowest-index atom of
    the lowest tied class and refining again.
    """
    n = len(graph.atoms)
    if n == 0:
        return []
    seeds = [
        (a.atomic_number, graph.degree(a.index), a.charge, graph.hydrogens(a.index),
         a.is_aromatic)
        for a in graph.atoms
    ]
    ranks = _refine(graph, _dense(seeds))
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        pick = min(i for i in range(n) if ranks[i] == tied)
        # Split the class: the picked atom stays, the rest move up by one half-step.
        ranks = _dense([(r, 0 if (r != tied or i == pick) else 1) for i, r in enumerate(ranks)])
        ranks = _refine(graph, ranks)
    return ranks


def _atom_token(graph: MolecularGraph, i: int) -> str:
    atom = graph.atoms[i]
    h = graph.hydrogens(i)
    sym = atom.element.lower() if atom.is_aromatic else atom.element
    organic = atom.element in ORGANIC_SUBSET and (
        not atom.is_aromatic or atom.element in ("B", "C", "N", "O", "P", "S")
    )
    if organic and atom.charge == 0 and h == default_hydrogens(graph, i):
        return sym
    out = "[" + sym
    if h:
        out += "H" + (str(h) if h > 1 else "")
    if atom.charge:
        out += ("+" if atom.charge > 0 else "-") + (str(abs(atom.charge)) if abs(atom.charge) > 1 else "")
    return out + "]"


def _bond_token(graph: MolecularGraph, i: int, j: int) -> str:
    order = graph.bond_between(i, j).order.plain
    if order is BondOrder.DOUBLE:
        return "="
    if order is BondOrder.TRIPLE:
        return "#"
    if order is BondOrder.SINGLE and graph.atoms[i].is_aromatic and graph.atoms[j].is_aromatic:
        return "-"
    return ""


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d}"


def _write_component(graph: MolecularGraph, ranks: list[int], start: int) -> str:
    adj = [sorted(graph.neighbors(i), key=lambda j: ranks[j]) for i in range(len(graph.atoms))]
    # Pass 1: DFS tree; non-tree edges become ring closures.
    parent = {start: None}
    children: dict[int, list[int]] = {}
    closures: dict[int, list[int]] = {}  # atom -> ring partners, in discovery order
    order: list[int] = []
    seen_edges = set()

    def visit(i):
        order.append(i)
        children[i] = []
        for j in adj[i]:
            key = frozenset((i, j))
            if key in seen_edges:
                continue
            seen_edges.add(key)
            if j in parent:
                closures.setdefault(j, []).append(i)  # opened at j (earlier), closed at i
                closures.setdefault(i, []).append(j)
            else:
                parent[j] = i
                children[i].append(j)
                visit(j)

    limit = sys.getrecursionlimit()
    if len(graph.atoms) + 100 > limit:
        sys.setrecursionlimit(len(graph.atoms) + 200)
    visit(start)
    position = {a: k for k, a in enumerate(order)}

    # Pass 2: emission with lowest-free ring digits.
    free: list[int] = []
    next_digit = 1
    assigned: dict[frozenset[int], int] = {}
    out: list[str] = []

    def emit(i):
        nonlocal next_digit
        out.append(_atom_token(graph, i))
        partners = sorted(closures.get(i, []), key=lambda j: (position[j] > position[i], position[j]))
        for j in partners:
            key = frozenset((i, j))
            if key in assigned:  # closing
                d = assigned.pop(key)
                out.append(_ring_label(d))
                free.append(d)
                free.sort()
            else:
                if free:
                    d = free.pop(0)
                else:
                    d = next_digit
                    next_digit += 1
                assigned[key] = d
                out.append(_bond_token(graph, i, j) + _ring_label(d))
        kids = children[i]
        for k, c in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                out.append("(")
            out.append(_bond_token(graph, i, c))
            emit(c)
            if not last:
                out.append(")")

    emit(start)
    return "".join(out)


def canonical_smiles(graph: MolecularGraph) -> str:
    """Canonical SMILES; raises :class:`ContractError` for unsanitized graphs."""
    if not graph.sanitized:
        raise ContractError("canonical_smiles requires a sanitized graph")
    if not graph.atoms:
        return ""
    ranks = canonical_ranks(graph)
    comps = graph.components()
    starts = sorted((min(c, key=lambda i: ranks[i]) for c in comps), key=lambda i: ranks[i])
    parts = [_write_component(graph, ranks, s) for s in starts]
    return ".".join(parts)

"""Backtracking substructure matching for functional-group patterns."""

from __future__ import annotations

from collections import deque
from typing import AbstractSet

from ..molgraph import BondOrder, MolecularGraph
from ..molgraph.rings import ring_bond_keys
from .templates import ANY_BOND, FunctionalGroupTemplate, PatternAtom


def _search_order(template: FunctionalGroupTemplate) -> list[tuple[int, int | None]]:
    """BFS over the pattern from atom 0: (pattern atom, already-placed parent)."""
    n = len(template.atoms)
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for b in template.bonds:
        adj[b.a].append(b.b)
        adj[b.b].append(b.a)
    seen = {0}
    order = [(0, None)]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in sorted(adj[i]):
            if j not in seen:
                seen.add(j)
                order.append((j, i))
                queue.append(j)
    if len(order) != n:
        raise ValueError(f"pattern for {template.name} is not connected")
    return order


class _Matcher:
    def __init__(self, graph: MolecularGraph, template: FunctionalGroupTemplate,
                 locked: AbstractSet[int]):
        self.g = graph
        self.t = template
        self.locked = locked
        self.ring_keys = ring_bond_keys(graph)
        self.ring_atoms = {i for k in self.ring_keys for i in k}
        self.order = _search_order(template)
        self.pbond: dict[frozenset[int], object] = {
            frozenset((b.a, b.b)): b for b in template.bonds
        }
        self.core = set(template.core)
        self.attach = set(template.attach)

    def atom_ok(self, pa: PatternAtom, gi: int) -> bool:
        atom = self.g.atoms[gi]
        if not pa.element_ok(atom.element):
            return False
        if pa.aromatic is not None and atom.is_aromatic != pa.aromatic:
            return False
        if pa.charge is not None and atom.charge != pa.charge:
            return False
        h = self.g.hydrogens(gi)
        if pa.h is not None and h != pa.h:
            return False
        if pa.hmin is not None and h < pa.hmin:
            return False
        if pa.hmax is not None and h > pa.hmax:
            return False
        deg = self.g.degree(gi)
        if pa.deg is not None and deg != pa.deg:
            return False
        if pa.hdeg is not None and deg + h != pa.hdeg:
            return False
        if pa.ring is not None and (gi in self.ring_atoms) != pa.ring:
            return False
        if pa.sat and any(o.plain is not BondOrder.SINGLE for _, o in self.g.adjacency[gi]):
            return False
        return True

    def bond_ok(self, pb, ga: int, gb: int) -> bool:
        bond = self.g.bond_between(ga, gb)
        if bond is None:
            return False
        if pb.order != ANY_BOND and bond.order.plain is not pb.order:
            return False
        if pb.ring is not None and (bond.key in self.ring_keys) != pb.ring:
            return False
        return True

    def closed_ok(self, mapping: dict[int, int]) -> bool:
        """Core atoms outside ``attach`` bond only within the core; no extra core-core bonds."""
        core_g = {mapping[i]: i for i in self.core}
        for pi in self.core:
            gi = mapping[pi]
            for gj in self.g.neighbors(gi):
                pj = core_g.get(gj)
                if pj is None:
                    if pi not in self.attach:
                        return False
                elif frozenset((pi, pj)) not in self.pbond:
                    return False
        return True

    def run(self) -> list[dict[int, int]]:
        out: list[dict[int, int]] = []
        mapping: dict[int, int] = {}
        used: set[int] = set()
        order = self.order

        def candidates(k):
            pi, parent = order[k]
            if parent is None:
                return range(len(self.g.atoms))
            return list(self.g.neighbors(mapping[parent]))

        def extend(k):
            if k == len(order):
                if self.closed_ok(mapping):
                    out.append(dict(mapping))
                return
            pi, _ = order[k]
            pa = self.t.atoms[pi]
            for gi in candidates(k):
                if gi in used:
                    continue
                if not pa.ctx and gi in self.locked:
                    continue
                if not self.atom_ok(pa, gi):
                    continue
                ok = True
                for pj, gj in mapping.items():
                    pb = self.pbond.get(frozenset((pi, pj)))
                    if pb is not None and not self.bond_ok(pb, gi, gj):
                        ok = False
                        break
                if not ok:
                    continue
                mapping[pi] = gi
                used.add(gi)
                extend(k + 1)
                del mapping[pi]
                used.discard(gi)

        extend(0)
        return out


def match_template(graph: MolecularGraph, template: FunctionalGroupTemplate,
                   locked: AbstractSet[int] = frozenset(), collapse: bool = True
                   ) -> list[dict[int, int]]:
    """Embeddings of ``template`` into ``graph`` whose core avoids ``locked``.

    Each result maps pattern atom index -> graph atom index (context atoms
    included). With ``collapse`` the embeddings are reduced to one per
    distinct core atom set (the lexicographically smallest map is kept).
    Results are sorted by the sorted tuple of core graph indices.
    """
    maps = _Matcher(graph, template, locked).run()

    def core_key(m):
        return tuple(sorted(m[i] for i in template.core))

    def full_key(m):
        return tuple(m[i] for i in range(len(template.atoms)))

    maps.sort(key=lambda m: (core_key(m), full_key(m)))
    if not collapse:
        return maps
    out, seen = [], set()
    for m in maps:
        key = core_key(m)
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


def core_atoms(template: FunctionalGroupTemplate, mapping: dict[int, int]) -> frozenset[int]:
    return frozenset(mapping[i] for i in template.core)

"""Ring perception: ring bonds and a smallest set of smallest rings."""

from __future__ import annotations

from collections import deque

from .graph import MolecularGraph


def ring_bond_keys(graph: MolecularGraph) -> frozenset[frozenset[int]]:
    """Keys of every bond that lies on at least one cycle."""
    out = set()
    for bond in graph.bonds:
        if _shortest_path(graph, bond.a, bond.b, banned=bond.key) is not None:
            out.add(bond.key)
    return frozenset(out)


def _shortest_path(graph, src, dst, banned, allowed=None) -> list[int] | None:
    prev = {src: None}
    queue = deque([src])
    while queue:
        i = queue.popleft()
        if i == dst:
            path = [i]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for j in graph.neighbors(i):
            if j in prev or (allowed is not None and j not in allowed):
                continue
            if frozenset((i, j)) == banned:
                continue
            prev[j] = i
            queue.append(j)
    return None


def sssr(graph: MolecularGraph) -> list[list[int]]:
    """Smallest set of smallest rings, each as an ordered atom cycle.

    Candidates are the shortest cycle through every ring bond; an
    independent subset is then chosen greedily by size over GF(2).
    """
    ring_keys = ring_bond_keys(graph)
    if not ring_keys:
        return []
    candidates: dict[frozenset[int], list[int]] = {}
    for bond in graph.bonds:
        if bond.key not in ring_keys:
            continue
        path = _shortest_path(graph, bond.a, bond.b, banned=bond.key)
        key = frozenset(path)
        if key not in candidates or len(path) < len(candidates[key]):
            candidates[key] = path
    ring_atoms = sorted({i for k in ring_keys for i in k})
    edge_ids = {k: n for n, k in enumerate(sorted(ring_keys, key=lambda k: tuple(sorted(k))))}
    # Cyclomatic number of the ring-bond subgraph.
    target = len(ring_keys) - len(ring_atoms) + _count_components(ring_atoms, ring_keys)

    def as_vector(path):
        v = 0
        for x, y in zip(path, path[1:] + path[:1]):
            v |= 1 << edge_ids[frozenset((x, y))]
        return v

    ordered = sorted(candidates.values(), key=lambda p: (len(p), sorted(p)))
    basis: list[int] = []  # reduced row-echelon vectors keyed by pivot
    pivots: dict[int, int] = {}
    chosen = []

    def try_add(path):
        v = as_vector(path)
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                basis.append(v)
                return True
        return False

    for path in ordered:
        if len(chosen) == target:
            break
        if try_add(path):
            chosen.append(path)
    if len(chosen) < target:
        for path in _extra_cycles(graph, ring_keys):
            if len(chosen) == target:
                break
            if try_add(path):
                chosen.append(path)
    return [_normalize_cycle(p) for p in chosen]


def _count_components(nodes, edges) -> int:
    parent = {i: i for i in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for key in edges:
        a, b = tuple(key)
        parent[find(a)] = find(b)
    return len({find(i) for i in nodes})


def _extra_cycles(graph, ring_keys):
    out = []
    for i in range(len(graph.atoms)):
        nbrs = [j for j in graph.neighbors(i) if frozenset((i, j)) in ring_keys]
        for x in range(len(nbrs)):
            for y in range(x + 1, len(nbrs)):
                a, b = nbrs[x], nbrs[y]
                sub = _shortest_path(graph, a, b, banned=None, allowed=None)
                if sub and i not in sub:
                    out.append([i] + sub)
    out.sort(key=lambda p: (len(p), sorted(p)))
    return out


def _normalize_cycle(path: list[int]) -> list[int]:
    """Rotate so the smallest index is first, direction toward smaller neighbour."""
    k = path.index(min(path))
    p = path[k:] + path[:k]
    if len(p) > 2 and p[-1] < p[1]:
        p = [p[0]] + p[1:][::-1]
    return p


def ring_systems(rings: list[list[int]]) -> list[list[int]]:
    """Group ring indices into fused/spiro/bridged systems (shared atoms)."""
    parent = list(range(len(rings)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    sets = [set(r) for r in rings]
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if sets[i] & sets[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(rings)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])

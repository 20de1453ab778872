"""Deterministic 2D depiction coordinates.

Rings are regular polygons (fused rings share an edge, spiro rings share
an atom), chains zigzag at 120 degrees, and whole ring systems are attached
to chains by their outward vector. Overlaps are relieved by mirroring the
smaller side of an acyclic bond; whatever remains is flagged, not hidden.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .graph import BondOrder, MolecularGraph
from .rings import ring_bond_keys, ring_systems, sssr

MIN_DISTANCE = 0.5
BOND_TOLERANCE = 0.2
OVERLAP_FLAG = "layout_overlap"


def _unit(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


def _angle(v) -> float:
    return math.atan2(v[1], v[0])


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _polygon_across_edge(pa, pb, n, away_from):
    """Center of a regular n-gon having edge (pa, pb), on the side opposite ``away_from``."""
    mid = (pa + pb) / 2
    edge = pb - pa
    perp = np.array([-edge[1], edge[0]]) / (np.linalg.norm(edge) or 1.0)
    apothem = 1.0 / (2 * math.tan(math.pi / n))
    if np.dot(perp, mid - away_from) < 0:
        perp = -perp
    return mid + perp * apothem


def _place_ring_from(ring, center, pos):
    """Place ring atoms on the circle through ``center`` continuing from already-placed ones."""
    n = len(ring)
    radius = 1.0 / (2 * math.sin(math.pi / n))
    step = 2 * math.pi / n
    placed = [k for k, a in enumerate(ring) if a in pos]
    k0 = placed[0]
    a0 = _angle(pos[ring[k0]] - center)
    # Orientation: if the next atom along the cycle is placed, measure its sign.
    sign = 1.0
    for k in placed[1:]:
        off = (k - k0) % n
        ang = _angle(pos[ring[k]] - center) - a0
        expected = off * step
        d_pos = math.remainder(ang - expected, 2 * math.pi)
        d_neg = math.remainder(ang + expected, 2 * math.pi)
        sign = 1.0 if abs(d_pos) <= abs(d_neg) else -1.0
        break
    for k, a in enumerate(ring):
        if a in pos:
            continue
        off = (k - k0) % n
        pos[a] = center + radius * _unit(a0 + sign * off * step)


class _Layout:
    def __init__(self, graph: MolecularGraph):
        self.g = graph
        self.rings = sssr(graph)
        self.ring_keys = ring_bond_keys(graph)
        self.systems = ring_systems(self.rings)
        self.system_of: dict[int, int] = {}
        for s, members in enumerate(self.systems):
            for r in members:
                for a in self.rings[r]:
                    self.system_of.setdefault(a, s)
        self.pos: dict[int, np.ndarray] = {}
        self.turn: dict[int, float] = {}

    # -- ring systems -------------------------------------------------------
    def system_coords(self, s: int) -> dict[int, np.ndarray]:
        members = sorted(self.systems[s], key=lambda r: (-len(self.rings[r]), r))
        # Start from the ring with the most neighbours in the system.
        ring_sets = {r: set(self.rings[r]) for r in members}
        members.sort(key=lambda r: (-sum(1 for q in members if q != r and ring_sets[r] & ring_sets[q]), r))
        pos: dict[int, np.ndarray] = {}
        centers: dict[int, np.ndarray] = {}
        first = members[0]
        ring = self.rings[first]
        n = len(ring)
        radius = 1.0 / (2 * math.sin(math.pi / n))
        for k, a in enumerate(ring):
            pos[a] = radius * _unit(math.pi / 2 + 2 * math.pi * k / n)
        centers[first] = np.zeros(2)
        pending = [r for r in members[1:]]
        while pending:
            best = None
            for r in pending:
                shared = [a for a in self.rings[r] if a in pos]
                if shared and (best is None or len(shared) > best[1]):
                    best = (r, len(shared))
            if best is None:
                break
            r = best[0]
            pending.remove(r)
            ring = self.rings[r]
            shared = [a for a in ring if a in pos]
            n = len(ring)
            if len(shared) == 1:
                a = shared[0]
                host = [q for q in centers if a in ring_sets[q]][0]
                out = pos[a] - centers[host]
                out /= np.linalg.norm(out) or 1.0
                radius = 1.0 / (2 * math.sin(math.pi / n))
                center = pos[a] + out * radius
            else:
                # Use an adjacent placed pair on this ring as the fusion edge.
                edge = None
                for k in range(n):
                    x, y = ring[k], ring[(k + 1) % n]
                    if x in pos and y in pos:
                        edge = (x, y)
                        break
                if edge is None:
                    edge = (shared[0], shared[1])
                host_centers = [centers[q] for q in centers if set(edge) <= ring_sets[q]]
                away = host_centers[0] if host_centers else np.mean([pos[a] for a in pos], axis=0)
                center = _polygon_across_edge(pos[edge[0]], pos[edge[1]], n, away)
            centers[r] = center
            _place_ring_from(ring, center, pos)
        return pos

    def place_system(self, s: int, anchor_atom: int | None, anchor_pos=None, from_pos=None):
        local = self.system_coords(s)
        atoms = sorted(local)
        if anchor_atom is None:
            for a in atoms:
                self.pos[a] = local[a]
            return
        centroid = np.mean([local[a] for a in atoms], axis=0)
        nbrs = [j for j in self.g.neighbors(anchor_atom) if j in local]
        inner = np.mean([local[j] for j in nbrs], axis=0) if nbrs else centroid
        out = local[anchor_atom] - inner
        if np.linalg.norm(out) < 1e-6:
            out = local[anchor_atom] - centroid
        want = from_pos - anchor_pos  # outward should point back to the parent atom
        theta = _angle(want) - _angle(out)
        rot = _rotation(theta)
        for a in atoms:
            self.pos[a] = anchor_pos + rot @ (local[a] - local[anchor_atom])

    # -- chains -------------------------------------------------------------
    def _is_linear(self, i: int) -> bool:
        orders = [o for _, o in self.g.adjacency[i]]
        return BondOrder.TRIPLE in orders or orders.count(BondOrder.DOUBLE) >= 2

    def child_directions(self, u: int, kids: list[int]) -> list[float]:
        placed = [j for j in self.g.neighbors(u) if j in self.pos and j != u]
        angles = sorted(_angle(self.pos[j] - self.pos[u]) for j in placed)
        k = len(kids)
        if not angles:
            return [2 * math.pi * m / k for m in range(k)] if k > 1 else [0.0]
        if len(angles) == 1:
            back = angles[0]
            if k == 1 and self._is_linear(u):
                return [back + math.pi]
            if k == 1:
                s = self.turn.get(u, 1.0)
                return [back + s * 2 * math.pi / 3]
            return [back + 2 * math.pi * (m + 1) / (k + 1) for m in range(k)]
        # Largest angular gap among placed neighbours.
        gaps = []
        for m, a in enumerate(angles):
            b = angles[(m + 1) % len(angles)] + (2 * math.pi if m == len(angles) - 1 else 0)
            gaps.append((b - a, a))
        width, start = max(gaps, key=lambda t: (round(t[0], 9), -t[1]))
        return [start + width * (m + 1) / (k + 1) for m in range(k)]

    def run(self) -> dict[int, np.ndarray]:
        g = self.g
        placed_systems: set[int] = set()
        comps = g.components()
        for comp in comps:
            before = set(self.pos)
            ring_atoms = [a for a in comp if a in self.system_of]
            if ring_atoms:
                sizes = {}
                for a in ring_atoms:
                    s = self.system_of[a]
                    sizes[s] = sizes.get(s, 0) + 1
                s0 = max(sorted(sizes), key=lambda s: sizes[s])
                self.place_system(s0, None)
                placed_systems.add(s0)
                queue = deque(sorted(a for a in comp if a in self.pos))
            else:
                terminals = [a for a in comp if g.degree(a) <= 1]
                root = terminals[0] if terminals else comp[0]
                self.pos[root] = np.zeros(2)
                self.turn[root] = 1.0
                queue = deque([root])
            while queue:
                u = queue.popleft()
                kids = [j for j in g.neighbors(u) if j not in self.pos]
                if not kids:
                    continue
                for j, ang in zip(kids, self.child_directions(u, kids)):
                    if j in self.pos:
                        continue
                    p = self.pos[u] + _unit(ang)
                    s = self.system_of.get(j)
                    if s is not None and s not in placed_systems:
                        self.place_system(s, j, p, self.pos[u])
                        placed_systems.add(s)
                        for a in sorted(self.systems_atoms(s)):
                            queue.append(a)
                    else:
                        self.pos[j] = p
                        self.turn[j] = -self.turn.get(u, 1.0)
                        queue.append(j)
            # Shift the component to the right of what is already placed.
            new = [a for a in comp if a not in before]
            if before and new:
                xs_old = max(self.pos[a][0] for a in before)
                xs_new = min(self.pos[a][0] for a in new)
                shift = np.array([xs_old - xs_new + 2.0, 0.0])
                for a in new:
                    self.pos[a] = self.pos[a] + shift
        return self.pos

    def systems_atoms(self, s: int) -> set[int]:
        return {a for r in self.systems[s] for a in self.rings[r]}


def _congestion(coords: np.ndarray, bonded: set[frozenset[int]]) -> float:
    n = len(coords)
    if n < 2:
        return 0.0
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(n, 1)
    dist = d[iu]
    mask = np.array([frozenset((int(a), int(b))) not in bonded for a, b in zip(*iu)])
    close = dist[mask]
    return float(np.sum(np.clip(0.9 - close, 0, None) ** 2))


def _side(graph: MolecularGraph, a: int, b: int) -> set[int]:
    """Atoms reachable from b without crossing the bond a-b."""
    seen = {b}
    stack = [b]
    while stack:
        i = stack.pop()
        for j in graph.neighbors(i):
            if (i == b and j == a) or j in seen:
                continue
            seen.add(j)
            stack.append(j)
    return seen


def _relieve_overlaps(graph: MolecularGraph, coords: np.ndarray, ring_keys) -> np.ndarray:
    bonded = {b.key for b in graph.bonds}
    score = _congestion(coords, bonded)
    if score == 0.0:
        return coords
    acyclic = [b for b in graph.bonds if b.key not in ring_keys]
    for _ in range(4):
        improved = False
        for bond in acyclic:
            side = _side(graph, bond.a, bond.b)
            if bond.a in side:
                continue
            if len(side) > len(graph.atoms) - len(side):
                side = _side(graph, bond.b, bond.a)
            idx = sorted(side)
            pa, pb = coords[bond.a], coords[bond.b]
            axis = (pb - pa) / (np.linalg.norm(pb - pa) or 1.0)
            trial = coords.copy()
            rel = trial[idx] - pa
            proj = rel @ axis
            trial[idx] = pa + 2 * np.outer(proj, axis) - rel
            s = _congestion(trial, bonded)
            if s < score - 1e-12:
                coords, score = trial, s
                improved = True
                if score == 0.0:
                    return coords
        if not improved:
            break
    return coords


def layout_problems(graph: MolecularGraph, coords: np.ndarray) -> list[str]:
    out = []
    for b in graph.bonds:
        d = float(np.linalg.norm(coords[b.a] - coords[b.b]))
        if abs(d - 1.0) > BOND_TOLERANCE:
            out.append(f"bond {b.a}-{b.b} length {d:.3f}")
    n = len(coords)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(coords[i] - coords[j]) < MIN_DISTANCE:
                out.append(f"atoms {i} and {j} overlap")
    return out


def generate_2d_coords(graph: MolecularGraph) -> MolecularGraph:
    """Return ``graph`` with ``coord_2d`` on every atom.

    Bond length is 1.0. When bond lengths leave the +/-20% band or two atoms
    come closer than 0.5, the result carries the ``layout_overlap`` flag.
    """
    n = len(graph.atoms)
    if n == 0:
        return graph
    lay = _Layout(graph)
    pos = lay.run()
    coords = np.array([pos[i] for i in range(n)], dtype=float)
    coords = _relieve_overlaps(graph, coords, lay.ring_keys)
    coords = np.round(coords, 12) + 0.0  # normalise -0.0 and float noise
    flags = [OVERLAP_FLAG] if layout_problems(graph, coords) else []
    return graph.with_coords(coords, flags)

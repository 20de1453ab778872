"""Directional Vector Matching: orient group templates from anchors and rebuild atoms.

Frames: anchors and boxes live on the 0-1000 canvas (y down). Template
coordinates are in bond-length units (y up). A pose maps template points
to the canvas as ``canvas = offset + scale * M @ t`` where ``M`` is a
rotation, optionally composed with a reflection.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .anchor import (ATOM_RADIUS, BOX_PADDING, BBox, ClosedSetError, FROM_WIRE, HybridGraph,
                     AnchorSet, parse_atom_label)
from .fgdict import FunctionalGroupTemplate
from .molgraph.elements import allowed_valences
from .molgraph import Atom, Bond, BondOrder, MolecularGraph, SanitizeError, sanitize

EXHAUSTIVE_LIMIT = 8  # candidates up to which assignment is brute-forced
ANGLE_STEPS = 360  # pose grid resolution (1 degree)
FLIP_Y = np.diag([1.0, -1.0])  # template (y up) -> canvas (y down)


class DegenerateDirectionError(ValueError):
    """Anchor coincides with its box center, so the direction is a zero vector."""


class ArityError(ValueError):
    """More anchors than attachment candidates."""


class StructuralError(ValueError):
    """Anchors and hybrid bonds cannot be paired consistently."""


class ReconstructionError(ValueError):
    """The assembled graph failed sanitization."""

    def __init__(self, message: str, problems=()):
        super().__init__(message)
        self.problems = tuple(problems)


@dataclass(frozen=True)
class AnchorMatch:
    anchor: int  # index j into the directions list
    candidate: int  # index m into template.attachment_candidates
    cosine: float


@dataclass(frozen=True)
class AnchorAssignment:
    matches: tuple[AnchorMatch, ...]
    directions: tuple[tuple[float, float], ...] = ()
    argmax: tuple[int, ...] = ()  # independent per-anchor argmax, before the injectivity repair

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(m.candidate for m in self.matches)

    @property
    def collided(self) -> bool:
        """True when the per-anchor argmax was not injective."""
        return len(set(self.argmax)) != len(self.argmax)

    @property
    def differs_from_argmax(self) -> bool:
        return tuple(self.argmax) != self.indices


# -- directions and cosine assignment -------------------------------------------

def anchor_direction(anchor: Sequence[float], box: BBox) -> np.ndarray:
    cx, cy = box.center
    v = np.array([float(anchor[0]) - cx, float(anchor[1]) - cy])
    if not np.any(v):
        raise DegenerateDirectionError(f"anchor {tuple(anchor)} sits on the box center")
    return v


def _cosines(directions: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    d = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    u = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.clip(d @ u.T, -1.0, 1.0)


def match_anchors(directions: Sequence[Sequence[float]], template: FunctionalGroupTemplate,
                  vectors: np.ndarray | None = None) -> AnchorAssignment:
    """Injective anchor -> attachment-candidate assignment maximizing total cosine.

    ``vectors`` overrides the template's canonical direction vectors (for
    example with the vectors of an oriented template).
    """
    u = np.asarray(template.direction_vectors if vectors is None else vectors, dtype=float)
    u = u.reshape(-1, 2)
    k, m = len(directions), len(u)
    if k > m:
        raise ArityError(f"{template.name}: {k} anchors but only {m} attachment candidates")
    if k == 0:
        return AnchorAssignment(())
    d = np.asarray(directions, dtype=float).reshape(-1, 2)
    if np.any(~np.any(d, axis=1)):
        raise DegenerateDirectionError(f"{template.name}: zero direction vector")
    cos = _cosines(d, u)
    return _solve(cos, d)


def _solve(cos: np.ndarray, d: np.ndarray) -> AnchorAssignment:
    """Injective maximum-total assignment on a (anchors x candidates) score matrix."""
    k, m = cos.shape
    argmax = tuple(int(np.argmax(row)) for row in cos)
    if len(set(argmax)) == k:
        choice = argmax
    elif m <= EXHAUSTIVE_LIMIT:
        best, choice = -math.inf, None
        for perm in itertools.permutations(range(m), k):
            total = float(sum(cos[j, perm[j]] for j in range(k)))
            if total > best + 1e-12:
                best, choice = total, perm
    else:
        rows, cols = linear_sum_assignment(-cos)
        choice = tuple(int(c) for _, c in sorted(zip(rows, cols)))
    matches = tuple(AnchorMatch(j, int(choice[j]), float(cos[j, choice[j]])) for j in range(k))
    return AnchorAssignment(matches, tuple(tuple(map(float, v)) for v in d), argmax)


# -- pose estimation ---------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    matrix: np.ndarray  # 2x2, includes the y flip
    scale: float  # canvas units per bond length
    offset: np.ndarray  # canvas position of the template origin
    mirrored: bool
    theta_deg: float
    residual: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.offset + self.scale * (np.asarray(points, dtype=float) @ self.matrix.T)


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _box_extent(w0: np.ndarray, h0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Box size (template units) from atom-center extents, as built by the anchor module."""
    w = w0 + 2 * ATOM_RADIUS
    h = h0 + 2 * ATOM_RADIUS
    pad = BOX_PADDING * np.hypot(w, h)
    return w + 2 * pad, h + 2 * pad


def orient_template(template: FunctionalGroupTemplate, anchors: Sequence[Sequence[float]],
                    box: BBox) -> Pose:
    """Fit rotation, reflection and scale of the template to its box and anchors.

    Every pose on a 1-degree grid (both handednesses) is scaled so that its
    padded bounding box matches the observed box diagonal and centered on the
    box. The score is the box-shape mismatch plus, for each anchor, the
    distance to the nearest posed attachment candidate.
    """
    t = np.asarray(template.canonical_coords, dtype=float)
    cand = t[list(template.attachment_candidates)]
    pts = np.asarray(anchors, dtype=float).reshape(-1, 2)
    thetas = np.arange(ANGLE_STEPS) * (2 * math.pi / ANGLE_STEPS)
    bw, bh = box.width, box.height
    bdiag = math.hypot(bw, bh)
    c = np.array(box.center)
    best = None
    for mirrored in (False, True):
        base = FLIP_Y @ (np.diag([-1.0, 1.0]) if mirrored else np.eye(2))
        mats = np.stack([base @ _rot(th) for th in thetas])  # (P, 2, 2)
        posed = np.einsum("pij,nj->pni", mats, t)  # (P, n, 2)
        lo, hi = posed.min(axis=1), posed.max(axis=1)
        w, h = _box_extent(hi[:, 0] - lo[:, 0], hi[:, 1] - lo[:, 1])
        scale = bdiag / np.hypot(w, h)
        mid = (lo + hi) / 2
        err = (np.abs(scale * w - bw) + np.abs(scale * h - bh)) / scale
        if len(pts):
            pc = np.einsum("pij,nj->pni", mats, cand) - mid[:, None, :]
            pc = c + scale[:, None, None] * pc  # (P, m, 2)
            dist = np.linalg.norm(pts[None, :, None, :] - pc[:, None, :, :], axis=3)
            err = err + dist.min(axis=2).sum(axis=1) / scale
        p = int(np.argmin(err))
        if best is None or err[p] < best[0] - 1e-9:
            offset = c - scale[p] * mid[p]
            best = (float(err[p]), Pose(mats[p], float(scale[p]), offset, mirrored,
                                        float(np.degrees(thetas[p])), float(err[p])))
    return best[1]


def oriented_vectors(template: FunctionalGroupTemplate, pose: Pose) -> np.ndarray:
    """Template direction vectors expressed in the canvas frame under ``pose``."""
    return np.asarray(template.direction_vectors, dtype=float) @ pose.matrix.T


# -- instantiation ------------------------------------------------------------------

@dataclass(frozen=True)
class PlacedGroup:
    graph: MolecularGraph  # template core atoms with canvas coordinates
    anchor_atoms: tuple[int, ...]  # core atom index bound to each anchor
    rotation: np.ndarray = field(repr=False)
    scale: float = 1.0
    residual: float = 0.0


def _umeyama(src: np.ndarray, dst: np.ndarray, allow_reflection: bool):
    """Least-squares similarity transform dst ~ s R src + t."""
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    xs, xd = src - mu_s, dst - mu_d
    var = float((xs ** 2).sum()) / len(src)
    cov = xd.T @ xs / len(src)
    u, sig, vt = np.linalg.svd(cov)
    d = np.eye(2)
    if np.linalg.det(u) * np.linalg.det(vt) < 0 and not allow_reflection:
        d[1, 1] = -1.0
    r = u @ d @ vt
    s = float(np.trace(np.diag(sig) @ d)) / var if var > 0 else 1.0
    t = mu_d - s * r @ mu_s
    res = float(np.linalg.norm(dst - (s * src @ r.T + t), axis=1).sum())
    return r, s, t, res


def _box_scale(template: FunctionalGroupTemplate, box: BBox, matrix: np.ndarray) -> float:
    posed = np.asarray(template.canonical_coords, dtype=float) @ matrix.T
    lo, hi = posed.min(axis=0), posed.max(axis=0)
    w, h = _box_extent(hi[0] - lo[0], hi[1] - lo[1])
    return math.hypot(box.width, box.height) / float(math.hypot(w, h))


def instantiate_group(template: FunctionalGroupTemplate, assignment: AnchorAssignment,
                      box: BBox, variant: Sequence[str] | None = None) -> PlacedGroup:
    """Copy the template core and align it to the box and matched anchors."""
    t = np.asarray(template.canonical_coords, dtype=float)
    cands = template.attachment_candidates
    c = np.array(box.center)
    k = len(assignment.matches)
    if k >= 2:
        src = np.array([t[cands[mt.candidate]] for mt in assignment.matches])
        dst = np.array([assignment.directions[mt.anchor] for mt in assignment.matches])
        r, s, off, res = _umeyama(src, dst, allow_reflection=True)
        matrix, offset = r, c + off
    elif k == 1:
        mt = assignment.matches[0]
        src = FLIP_Y @ t[cands[mt.candidate]]
        dst = np.array(assignment.directions[0])
        ang = 0.0
        if np.any(src) and np.any(dst):
            ang = math.atan2(dst[1], dst[0]) - math.atan2(src[1], src[0])
        matrix = _rot(ang) @ FLIP_Y
        s = _box_scale(template, box, matrix)
        offset, res = c, 0.0
    else:
        matrix = FLIP_Y
        s = _box_scale(template, box, matrix)
        offset, res = c, 0.0
    coords = offset + s * (t @ matrix.T)
    core = template.instance_graph(tuple(variant) if variant else None)
    core = core.with_coords(coords)
    anchor_atoms = tuple(cands[mt.candidate] for mt in assignment.matches)
    return PlacedGroup(core, anchor_atoms, matrix, float(s), res)


# -- full reconstruction ------------------------------------------------------------

@dataclass(frozen=True)
class GroupReport:
    node_id: str
    label: str
    assignment: AnchorAssignment
    pose: Pose | None
    attachment_atoms: tuple[int, ...]  # core index per anchor, after clustering


@dataclass(frozen=True)
class Reconstruction:
    graph: MolecularGraph
    groups: tuple[GroupReport, ...]

    def diagnostics(self) -> list[dict]:
        out = []
        for g in self.groups:
            out.append({
                "id": g.node_id,
                "label": g.label,
                "assignment": [[m.anchor, m.candidate, round(m.cosine, 6)]
                               for m in g.assignment.matches],
                "argmax": list(g.assignment.argmax),
                "collision_resolved": g.assignment.collided,
            })
        return out


def _clusters(points: Sequence[Sequence[float]], tol: float) -> list[int]:
    """Cluster label per point; coincident keypoints share a label."""
    labels: list[int] = []
    reps: list[np.ndarray] = []
    for p in points:
        q = np.asarray(p, dtype=float)
        for k, r in enumerate(reps):
            if np.linalg.norm(q - r) <= tol:
                labels.append(k)
                break
        else:
            labels.append(len(reps))
            reps.append(q)
    return labels


@lru_cache(maxsize=None)
def template_symmetries(template: FunctionalGroupTemplate) -> tuple[tuple[int, ...], ...]:
    """Core-atom permutations induced by point symmetries of the canonical drawing.

    Elements and bond orders are ignored: these are exactly the relabellings
    that a box plus keypoints cannot tell apart. Identity comes first.
    """
    coords = np.asarray(template.canonical_coords, dtype=float)
    n = len(coords)
    identity = tuple(range(n))
    norms = np.linalg.norm(coords, axis=1)
    if n < 2 or norms.max() < 1e-9:
        return (identity,)
    edges = {frozenset((b.a, b.b)) for b in template.pattern.bonds}
    a = int(np.argmax(norms))
    ang_a = math.atan2(coords[a, 1], coords[a, 0])
    transforms = []
    for b in range(n):
        if abs(norms[b] - norms[a]) > 1e-4:
            continue
        ang_b = math.atan2(coords[b, 1], coords[b, 0])
        transforms.append(_rot(ang_b - ang_a))
        phi = ang_a + ang_b
        transforms.append(np.array([[math.cos(phi), math.sin(phi)],
                                    [math.sin(phi), -math.cos(phi)]]))
    perms = {identity}
    for q in transforms:
        mapped = coords @ q.T
        dist = np.linalg.norm(mapped[:, None] - coords[None], axis=2)
        perm = tuple(int(np.argmin(row)) for row in dist)
        if len(set(perm)) != n or dist[np.arange(n), perm].max() > 1e-3:
            continue
        if all(frozenset((perm[i], perm[j])) in edges for i, j in map(tuple, edges)):
            perms.add(perm)
    return (identity,) + tuple(sorted(perms - {identity}))


def attachment_capacity(template: FunctionalGroupTemplate, core_index: int,
                        variant: Sequence[str] | None = None) -> tuple[float, float]:
    """(required, maximum) external valence of a core atom.

    The requirement is non-zero only when the pattern fixes the H count, e.g.
    an ester oxygen with no hydrogen must bond outward.
    """
    graph = template.instance_graph(tuple(variant) if variant else None)
    atom = graph.atoms[core_index]
    pa = template.atoms[template.core[core_index]]
    if pa.hdeg is not None:
        return 0.0, float(pa.hdeg - graph.degree(core_index))
    vals = allowed_valences(atom.element, atom.charge)
    if vals is None:
        return 0.0, math.inf
    used = graph.bond_sum(core_index) + (1 if atom.is_aromatic else 0)
    h = pa.h if pa.h is not None else (pa.hmin or 0)
    need = float(max(0, min(vals) - used - h)) if pa.h is not None else 0.0
    return need, float(max(vals) - used - h)


def _inversions(seq: Sequence[int]) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def _refine(template: FunctionalGroupTemplate, chosen: list[int], loads: list[float],
            variant) -> list[int]:
    """Pick among drawing-symmetric relabellings of ``chosen`` (core indices per cluster).

    Preference: valence requirements and capacities met, then anchors listed in template order
    (fewest inversions), then the purely geometric answer.
    """
    cands = set(template.attachment_candidates)
    best = None
    for rank, perm in enumerate(template_symmetries(template)):
        alt = [perm[c] for c in chosen]
        if not all(c in cands for c in alt):
            continue
        got = dict.fromkeys(cands, 0.0)
        for c, load in zip(alt, loads):
            got[c] += load
        overflow = 0
        for c, load in got.items():
            need, cap = attachment_capacity(template, c, variant)
            overflow += (load > cap) + (load < need)
        key = (overflow, _inversions(alt), rank)
        if best is None or key < best[0]:
            best = (key, alt)
    return best[1]


def _central_candidates(template: FunctionalGroupTemplate) -> tuple[int, ...]:
    """Candidates sitting on the centroid of a multi-atom template (no intrinsic direction)."""
    coords = np.asarray(template.canonical_coords, dtype=float)
    if len(coords) < 2:
        return ()
    c = coords.mean(axis=0)
    return tuple(k for k, i in enumerate(template.attachment_candidates)
                 if np.linalg.norm(coords[i] - c) < 0.1)


def _match_with_central(reps, box: BBox, pose: Pose, u: np.ndarray, central: Sequence[int]
                        ) -> AnchorAssignment:
    """Cosine scores, except that a central candidate scores how close the anchor
    lies to the box center: 1 at the center, 0 at half a bond length, -1 beyond one."""
    c = np.array(box.center)
    v = np.asarray(reps, dtype=float) - c
    r = np.linalg.norm(v, axis=1)
    safe = np.where(r[:, None] > 1e-9, v, np.array([1.0, 0.0]))
    cos = _cosines(safe, u)
    closeness = np.clip(1.0 - r / (0.5 * pose.scale), -1.0, 1.0)
    for k in central:
        cos[:, k] = closeness
    return _solve(cos, v)


def _assign_group(template: FunctionalGroupTemplate, anchors: Sequence[Sequence[float]],
                  box: BBox, pose: Pose, tol: float, loads: Sequence[float] = (),
                  variant=None):
    """Map each anchor to a template core index by cosine matching on the posed template.

    Coincident anchors (several bonds leaving one atom) are clustered first
    and share a candidate. Relabellings that the drawing cannot distinguish
    are then settled by valence capacity and anchor order.
    """
    cands = template.attachment_candidates
    if not anchors:
        return AnchorAssignment(()), pose, ()
    labels = _clusters(anchors, tol)
    reps = [anchors[labels.index(k)] for k in range(max(labels) + 1)]
    raw = tuple((float(p[0]) - box.center[0], float(p[1]) - box.center[1]) for p in reps)
    if len(cands) == 1:
        assignment = AnchorAssignment(
            tuple(AnchorMatch(j, 0, 1.0) for j in range(len(reps))), raw, (0,) * len(reps))
        if len(reps) > 1:
            raise ArityError(f"{template.name}: {len(reps)} distinct anchors but one candidate")
    else:
        if len(reps) > len(cands):
            raise ArityError(f"{template.name}: {len(reps)} distinct anchors "
                             f"but only {len(cands)} attachment candidates")
        u = oriented_vectors(template, pose)
        central = _central_candidates(template)
        try:
            if central:
                assignment = _match_with_central(reps, box, pose, u, central)
            else:
                dirs = [anchor_direction(p, box) for p in reps]
                assignment = match_anchors(dirs, template, u)
        except DegenerateDirectionError:
            # Fall back to the posed candidate positions nearest to each anchor.
            posed = pose.apply(np.asarray(template.canonical_coords)[list(cands)])
            cost = np.linalg.norm(np.asarray(reps, dtype=float)[:, None] - posed[None], axis=2)
            rows, cols = linear_sum_assignment(cost)
            assignment = AnchorAssignment(
                tuple(AnchorMatch(int(r), int(c), 1.0) for r, c in zip(rows, cols)), raw,
                tuple(int(np.argmin(row)) for row in cost))
    chosen = [cands[m.candidate] for m in sorted(assignment.matches, key=lambda m: m.anchor)]
    if len(cands) > 1:
        cluster_load = [0.0] * len(reps)
        for j, load in enumerate(loads or [1.0] * len(anchors)):
            cluster_load[labels[j]] += load
        chosen = _refine(template, chosen, cluster_load, variant)
    return assignment, pose, tuple(chosen[labels[j]] for j in range(len(anchors)))


def _pair_bonds(hybrid: HybridGraph, anchors: AnchorSet, single: set[str], bond_len: float):
    """Bind each (bond, super-node endpoint) to one anchor index of that node.

    Each anchor serves one bond; pairs whose separation is closest to one
    bond length are taken first (FG-FG bonds use mutual anchor proximity).
    """
    centers = {a.id: np.array(a.bbox.center) for a in hybrid.residual_atoms}
    options = []
    need: dict[str, int] = {}
    for bi, b in enumerate(hybrid.bonds):
        ends = [e for e in (b.source, b.target) if e.startswith("FG_")]
        for e in ends:
            need[e] = need.get(e, 0) + 1
        if not ends:
            continue
        if len(ends) == 1:
            g = ends[0]
            other = b.target if g == b.source else b.source
            for j, p in enumerate(anchors[g]):
                d = float(np.linalg.norm(np.asarray(p) - centers[other]))
                options.append((abs(d - bond_len), bi, ((g, j),)))
        else:
            g, h = ends
            for j, p in enumerate(anchors[g]):
                for k, q in enumerate(anchors[h]):
                    d = float(np.linalg.norm(np.asarray(p) - np.asarray(q)))
                    options.append((abs(d - bond_len), bi, ((g, j), (h, k))))
    for node, n in need.items():
        k = len(anchors[node])
        if k > n:
            raise StructuralError(f"{node}: {k} anchors but only {n} incident bonds")
        if k < n and node not in single:
            if k == 0:
                raise StructuralError(f"{node}: {n} incident bonds but no anchors")
    options.sort(key=lambda o: (o[0], o[1], o[2]))
    used: set[tuple[str, int]] = set()
    done: dict[tuple[int, str], int] = {}
    for _, bi, refs in options:
        if any((bi, g) in done for g, _ in refs) or any(r in used for r in refs):
            continue
        for r in refs:
            used.add(r)
            done[(bi, r[0])] = r[1]
    # Bonds left over (fewer anchors than bonds): reuse the closest anchor.
    for bi, b in enumerate(hybrid.bonds):
        for e in (b.source, b.target):
            if e.startswith("FG_") and (bi, e) not in done and anchors[e]:
                other = b.target if e == b.source else b.source
                target = centers.get(other)
                if target is None:
                    target = np.mean(np.asarray(anchors[other] or [[0, 0]], dtype=float), axis=0) \
                        if other.startswith("FG_") else np.zeros(2)
                dists = [abs(float(np.linalg.norm(np.asarray(p) - target)) - bond_len)
                         for p in anchors[e]]
                done[(bi, e)] = int(np.argmin(dists))
    return done


def reconstruct_detailed(hybrid: HybridGraph, anchors: AnchorSet,
                         dictionary: Mapping[str, FunctionalGroupTemplate]) -> Reconstruction:
    for n in hybrid.super_nodes:
        if n.label not in dictionary:
            raise ClosedSetError(f"{n.id}: label {n.label!r} is not in the group dictionary")
    templates = {n.id: dictionary[n.label] for n in hybrid.super_nodes}
    single = {nid for nid, t in templates.items() if len(t.attachment_candidates) == 1}

    # Scale estimate (canvas units per bond) from the group poses.
    poses = {n.id: orient_template(templates[n.id], anchors[n.id], n.bbox)
             for n in hybrid.super_nodes}
    scales = [p.scale for p in poses.values()]
    if scales:
        bond_len = float(np.median(scales))
    elif hybrid.residual_atoms:
        # Atom boxes are 0.6 bond lengths plus padding across.
        w = np.median([a.bbox.width for a in hybrid.residual_atoms])
        bond_len = float(w / (2 * ATOM_RADIUS * (1 + 2 * BOX_PADDING * math.sqrt(2))))
    else:
        bond_len = 1.0
    tol = 0.05 * bond_len

    atoms: list[Atom] = []
    node_atom: dict[str, int] = {}
    for a in hybrid.residual_atoms:
        element, h, charge = parse_atom_label(a.symbol)
        node_atom[a.id] = len(atoms)
        cx, cy = a.bbox.center
        atoms.append(Atom(len(atoms), element, charge, h, False, (cx / bond_len, -cy / bond_len)))

    pairing = _pair_bonds(hybrid, anchors, single, bond_len)
    loads: dict[str, list[float]] = {n.id: [0.0] * len(anchors[n.id]) for n in hybrid.super_nodes}
    for (bi, node), j in pairing.items():
        loads[node][j] += FROM_WIRE[hybrid.bonds[bi].type].valence

    reports = []
    group_base: dict[str, int] = {}
    anchor_core: dict[str, tuple[int, ...]] = {}
    hdeg: dict[int, int] = {}
    bonds: list[Bond] = []
    for n in hybrid.super_nodes:
        t = templates[n.id]
        pose = poses[n.id]
        assignment, pose, per_anchor = _assign_group(t, list(anchors[n.id]), n.bbox, pose, tol,
                                                     loads[n.id], n.variant)
        placed = instantiate_group(t, assignment, n.bbox, n.variant)
        base = len(atoms)
        group_base[n.id] = base
        anchor_core[n.id] = per_anchor
        for k, atom in enumerate(placed.graph.atoms):
            x, y = atom.coord_2d
            atoms.append(replace(atom, index=base + k, coord_2d=(x / bond_len, -y / bond_len)))
            pa = t.atoms[t.core[k]]
            if pa.hdeg is not None:
                hdeg[base + k] = pa.hdeg
        for b in placed.graph.bonds:
            bonds.append(Bond(base + b.a, base + b.b, b.order))
        reports.append(GroupReport(n.id, n.label, assignment, pose, per_anchor))

    def endpoint(bi: int, node: str) -> int:
        if node in node_atom:
            return node_atom[node]
        t = templates[node]
        if node in single:
            return group_base[node] + t.attachment_candidates[0]
        j = pairing.get((bi, node))
        if j is None:
            raise StructuralError(f"{node}: no anchor available for bond {bi}")
        return group_base[node] + anchor_core[node][j]

    seen = {b.key for b in bonds}
    for bi, hb in enumerate(hybrid.bonds):
        u, v = endpoint(bi, hb.source), endpoint(bi, hb.target)
        if u == v or frozenset((u, v)) in seen:
            raise StructuralError(f"bond {hb.source}-{hb.target} collapses onto existing atoms")
        seen.add(frozenset((u, v)))
        bonds.append(Bond(u, v, FROM_WIRE[hb.type]))

    graph = MolecularGraph(tuple(atoms), tuple(bonds))
    aromatic = {i for b in bonds if b.order is BondOrder.AROMATIC for i in (b.a, b.b)}
    fixed = []
    for atom in graph.atoms:
        i = atom.index
        if i in hdeg:
            atom = replace(atom, explicit_h=max(0, hdeg[i] - graph.degree(i)))
        if i in aromatic and not atom.is_aromatic:
            atom = replace(atom, is_aromatic=True)
        fixed.append(atom)
    graph = graph.with_atoms(fixed)
    try:
        graph = sanitize(graph)
    except SanitizeError as exc:
        raise ReconstructionError(f"reconstructed graph failed sanitization: {exc}",
                                  exc.problems) from exc
    return Reconstruction(graph, tuple(reports))


def reconstruct(hybrid: HybridGraph, anchors: AnchorSet,
                dictionary: Mapping[str, FunctionalGroupTemplate]) -> MolecularGraph:
    return reconstruct_detailed(hybrid, anchors, dictionary).graph

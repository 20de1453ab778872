"""Hybrid-granularity graphs, visual anchors and their document format.

Coordinates live on the 0-1000 molecule-crop canvas (y grows downward).
A super-node carries one anchor keypoint per cross-boundary bond, placed
on the group atom that bonds outward (so k_g equals the number of incident
hybrid bonds, and two bonds leaving the same atom share a location).
Anchors of one super-node are listed in template atom order.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .fgdict import Decomposition
from .molgraph import BondOrder, ContractError, MolecularGraph
from .molgraph.graph import default_hydrogens

CANVAS = 1000.0
ATOM_RADIUS = 0.3  # in bond-length units
BOX_PADDING = 0.04  # fraction of the box diagonal
ANCHOR_SLACK = 5.0  # keypoints may sit this far outside their box

WIRE_ORDERS = {
    BondOrder.SINGLE: "SINGLE",
    BondOrder.DOUBLE: "DOUBLE",
    BondOrder.TRIPLE: "TRIPLE",
    BondOrder.AROMATIC: "AROMATIC",
    BondOrder.WEDGE: "WEDGE",
    BondOrder.DASH: "DASH",
}
FROM_WIRE = {v: k for k, v in WIRE_ORDERS.items()}


class HybridFormatError(ValueError):
    """Malformed hybrid document (bad reference, missing field, ...)."""


class ClosedSetError(HybridFormatError):
    """A super-node label is not in the loaded dictionary."""


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box {self.as_list()}")

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "BBox":
        return cls(x, y, x + w, y + h)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, pt, slack: float = 0.0) -> bool:
        x, y = pt
        return (self.x1 - slack <= x <= self.x2 + slack
                and self.y1 - slack <= y <= self.y2 + slack)

    def intersection(self, other: "BBox") -> float:
        w = min(self.x2, other.x2) - max(self.x1, other.x1)
        h = min(self.y2, other.y2) - max(self.y1, other.y1)
        return w * h if w > 0 and h > 0 else 0.0

    def is_normalized(self) -> bool:
        return all(0.0 <= v <= CANVAS for v in self.as_list())


@dataclass(frozen=True)
class SuperNode:
    id: str
    label: str
    bbox: BBox
    variant: tuple[str, ...] = ()  # halogen identity for groups with an "X" atom


@dataclass(frozen=True)
class ResidualAtom:
    id: str
    symbol: str  # element, plus "H<n>" / charge when they differ from the default
    bbox: BBox


@dataclass(frozen=True)
class HybridBond:
    source: str
    target: str
    type: str = "SINGLE"


@dataclass(frozen=True)
class HybridGraph:
    super_nodes: tuple[SuperNode, ...] = ()
    residual_atoms: tuple[ResidualAtom, ...] = ()
    bonds: tuple[HybridBond, ...] = ()

    def __post_init__(self):
        ids = [n.id for n in self.super_nodes] + [a.id for a in self.residual_atoms]
        if len(set(ids)) != len(ids):
            raise HybridFormatError("duplicate node id")
        for n in self.super_nodes:
            if not n.id.startswith("FG_"):
                raise HybridFormatError(f"super-node id {n.id!r} lacks the FG_ prefix")
        for a in self.residual_atoms:
            if not a.id.startswith("A_"):
                raise HybridFormatError(f"atom id {a.id!r} lacks the A_ prefix")
        known = set(ids)
        for b in self.bonds:
            for end in (b.source, b.target):
                if end not in known:
                    raise HybridFormatError(f"bond references unknown node id {end!r}")
            if b.source == b.target:
                raise HybridFormatError(f"self-bond on {b.source!r}")
            if b.type not in FROM_WIRE:
                raise HybridFormatError(f"unknown bond type {b.type!r}")

    def node_box(self, node_id: str) -> BBox:
        for n in self.super_nodes:
            if n.id == node_id:
                return n.bbox
        for a in self.residual_atoms:
            if a.id == node_id:
                return a.bbox
        raise KeyError(node_id)


@dataclass(frozen=True)
class AnchorSet:
    points: Mapping[str, tuple[tuple[float, float], ...]] = field(default_factory=dict)

    def __getitem__(self, node_id: str) -> tuple[tuple[float, float], ...]:
        return tuple(self.points.get(node_id, ()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnchorSet):
            return NotImplemented
        norm = lambda p: {k: tuple(tuple(map(float, x)) for x in v) for k, v in p.items() if v}
        return norm(self.points) == norm(other.points)

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(v)) for k, v in self.points.items())))


# -- residual atom labels ---------------------------------------------------------

_LABEL = re.compile(r"^([A-Z][a-z]?)(H(\d*))?([+-]\d*)?$")


def atom_label(graph: MolecularGraph, i: int) -> str:
    """Element symbol, with H count and charge spelled out only when non-default."""
    atom = graph.atoms[i]
    out = atom.element
    h = graph.hydrogens(i)
    if atom.explicit_h is not None and h != default_hydrogens(graph, i):
        out += "H" + (str(h) if h != 1 else "")
    if atom.charge:
        out += ("+" if atom.charge > 0 else "-") + (str(abs(atom.charge)) if abs(atom.charge) > 1 else "")
    return out


def parse_atom_label(label: str) -> tuple[str, int | None, int]:
    """(element, explicit H or None, charge) from a residual atom label."""
    m = _LABEL.match(label.strip())
    if not m:
        raise HybridFormatError(f"unreadable atom symbol {label!r}")
    element = m.group(1)
    h = None
    if m.group(2):
        h = int(m.group(3)) if m.group(3) else 1
    charge = 0
    if m.group(4):
        mag = int(m.group(4)[1:]) if len(m.group(4)) > 1 else 1
        charge = mag if m.group(4)[0] == "+" else -mag
    return element, h, charge


# -- canvas mapping ---------------------------------------------------------------

@dataclass(frozen=True)
class CanvasMap:
    """Uniform-scale map from depiction units to the 0-1000 canvas (y flipped)."""

    scale: float
    x0: float
    y0: float
    bond_length: float

    def __call__(self, xy) -> tuple[float, float]:
        x, y = xy
        return ((x - self.x0) * self.scale, (self.y0 - y) * self.scale)

    @classmethod
    def fit(cls, coords: np.ndarray, bond_length: float) -> "CanvasMap":
        margin = bond_length
        lo = coords.min(axis=0) - margin
        hi = coords.max(axis=0) + margin
        span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
        scale = CANVAS / span
        # Center the drawing on the square canvas.
        cx = (lo[0] + hi[0]) / 2
        cy = (lo[1] + hi[1]) / 2
        return cls(scale, cx - span / 2, cy + span / 2, bond_length)


def _bond_length(graph: MolecularGraph, coords: np.ndarray) -> float:
    if not graph.bonds:
        return 1.0
    d = [float(np.linalg.norm(coords[b.a] - coords[b.b])) for b in graph.bonds]
    med = float(np.median(d))
    return med if med > 1e-9 else 1.0


def _box_around(points: list[tuple[float, float]], radius: float) -> BBox:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x1, y1, x2, y2 = min(xs) - radius, min(ys) - radius, max(xs) + radius, max(ys) + radius
    pad = BOX_PADDING * math.hypot(x2 - x1, y2 - y1)
    return BBox(max(0.0, x1 - pad), max(0.0, y1 - pad), min(CANVAS, x2 + pad), min(CANVAS, y2 + pad))


def group_box(points: list[tuple[float, float]], atom_radius: float) -> BBox:
    """Box of a set of canvas points: atom discs of ``atom_radius`` plus 4% diagonal padding."""
    return _box_around(points, atom_radius)


def canvas_positions(graph: MolecularGraph) -> tuple[list[tuple[float, float]], CanvasMap]:
    """Atom positions on the 0-1000 canvas and the map that produced them."""
    coords = np.array([a.coord_2d for a in graph.atoms], dtype=float)
    cmap = CanvasMap.fit(coords, _bond_length(graph, coords))
    return [cmap(c) for c in coords], cmap


def compute_anchors(graph: MolecularGraph, decomposition: Decomposition
                    ) -> tuple[HybridGraph, AnchorSet]:
    if not graph.has_coords:
        raise ContractError("compute_anchors needs 2D coordinates on every atom")
    n = len(graph.atoms)
    if n == 0:
        return HybridGraph(), AnchorSet({})
    canvas, cmap = canvas_positions(graph)
    radius = ATOM_RADIUS * cmap.bond_length * cmap.scale

    owner = decomposition.owner()
    residual = sorted(decomposition.residual_atoms)
    atom_ids = {a: f"A_{k}" for k, a in enumerate(residual, start=1)}
    node_of = {a: owner.get(a) or atom_ids[a] for a in range(n)}

    supers = tuple(
        SuperNode(g.instance_id, g.name, group_box([canvas[a] for a in sorted(g.atoms)], radius),
                  g.variant)
        for g in decomposition.group_instances
    )
    atoms = tuple(
        ResidualAtom(atom_ids[a], atom_label(graph, a), group_box([canvas[a]], radius))
        for a in residual
    )
    core_pos = {a: k for g in decomposition.group_instances for k, a in enumerate(g.core_map)}
    bonds = []
    keyed: dict[str, list[tuple[int, int, tuple[float, float]]]] = {}
    for bi, b in enumerate(graph.bonds):
        u, v = node_of[b.a], node_of[b.b]
        if u == v:
            continue
        bonds.append(HybridBond(u, v, WIRE_ORDERS[b.order]))
        # One keypoint per cross-boundary bond, at the inside endpoint.
        for end in (b.a, b.b):
            if end in owner:
                xy = tuple(round(c, 6) for c in canvas[end])
                keyed.setdefault(owner[end], []).append((core_pos.get(end, 0), bi, xy))
    # Listed in template atom order: this breaks ties the drawing cannot.
    points = {k: tuple(xy for _, _, xy in sorted(v)) for k, v in keyed.items()}
    return HybridGraph(supers, atoms, tuple(bonds)), AnchorSet(points)


# -- document format --------------------------------------------------------------

def serialize_hybrid(hybrid: HybridGraph, anchors: AnchorSet) -> dict[str, Any]:
    """Document with sections supernodes, atoms, bonds, anchors (in that order)."""
    supers = []
    for n in hybrid.super_nodes:
        entry: dict[str, Any] = {"id": n.id, "label": n.label, "bbox": n.bbox.as_list()}
        if n.variant:
            entry["variant"] = list(n.variant)
        supers.append(entry)
    return {
        "supernodes": supers,
        "atoms": [{"id": a.id, "symbol": a.symbol, "bbox": a.bbox.as_list()}
                  for a in hybrid.residual_atoms],
        "bonds": [{"source": b.source, "target": b.target, "type": b.type} for b in hybrid.bonds],
        "anchors": {k: [list(p) for p in v] for k, v in anchors.points.items()},
    }


def dumps_hybrid(hybrid: HybridGraph, anchors: AnchorSet) -> str:
    return json.dumps(serialize_hybrid(hybrid, anchors), indent=2)


_ALIAS = [(re.compile(r"^fg_(\w+)$", re.I), "FG_"), (re.compile(r"^(?:atom|a)_(\w+)$", re.I), "A_")]


def _normalize_id(raw: str, kind: str) -> str:
    raw = str(raw)
    if raw.startswith(kind):
        return raw
    for pat, prefix in _ALIAS:
        m = pat.match(raw)
        if m and prefix == kind:
            return prefix + m.group(1)
    return kind + raw


def _bbox(value, where: str) -> BBox:
    try:
        x1, y1, x2, y2 = (float(v) for v in value)
        return BBox(x1, y1, x2, y2)
    except (TypeError, ValueError) as exc:
        raise HybridFormatError(f"{where}: invalid bbox {value!r}") from exc


def parse_hybrid(document: str | Mapping[str, Any], dictionary: Mapping | None = None
                 ) -> tuple[HybridGraph, AnchorSet]:
    """Read either this package's serialization or a recognizer document.

    Recognizer ids such as ``fg_1`` / ``atom_1`` become ``FG_1`` / ``A_1``.
    Anchors may come as a top-level ``anchors`` mapping or per super-node.
    When ``dictionary`` is given, labels outside it raise :class:`ClosedSetError`.
    """
    doc = json.loads(document) if isinstance(document, str) else document
    if not isinstance(doc, Mapping):
        raise HybridFormatError("hybrid document must be a JSON object")
    id_map: dict[str, str] = {}
    supers, points = [], {}
    for k, entry in enumerate(doc.get("supernodes", []) or []):
        where = f"supernodes[{k}]"
        try:
            raw_id, label = entry["id"], entry["label"]
        except KeyError as exc:
            raise HybridFormatError(f"{where}: missing field {exc}") from None
        if dictionary is not None and label not in dictionary:
            raise ClosedSetError(f"{where}: label {label!r} is not in the group dictionary")
        nid = _normalize_id(raw_id, "FG_")
        id_map[str(raw_id)] = nid
        variant = tuple(entry.get("variant", ()) or ())
        supers.append(SuperNode(nid, label, _bbox(entry.get("bbox"), where), variant))
        if "anchors" in entry and entry["anchors"]:
            points[nid] = tuple((float(p[0]), float(p[1])) for p in entry["anchors"])
    atoms = []
    for k, entry in enumerate(doc.get("atoms", []) or []):
        where = f"atoms[{k}]"
        try:
            raw_id = entry["id"]
            symbol = entry.get("symbol", entry.get("label"))
        except KeyError as exc:
            raise HybridFormatError(f"{where}: missing field {exc}") from None
        if symbol is None:
            raise HybridFormatError(f"{where}: missing field 'symbol'")
        parse_atom_label(symbol)
        nid = _normalize_id(raw_id, "A_")
        id_map[str(raw_id)] = nid
        atoms.append(ResidualAtom(nid, symbol, _bbox(entry.get("bbox"), where)))
    bonds = []
    for k, entry in enumerate(doc.get("bonds", []) or []):
        ends = []
        for key in ("source", "target"):
            raw = entry.get(key)
            if str(raw) not in id_map:
                raise HybridFormatError(f"bonds[{k}]: unknown node id {raw!r}")
            ends.append(id_map[str(raw)])
        btype = str(entry.get("type", "SINGLE")).upper()
        if btype not in FROM_WIRE:
            raise HybridFormatError(f"bonds[{k}]: unknown bond type {btype!r}")
        bonds.append(HybridBond(ends[0], ends[1], btype))
    for raw_id, pts in (doc.get("anchors") or {}).items():
        nid = id_map.get(str(raw_id), _normalize_id(raw_id, "FG_"))
        if nid not in {s.id for s in supers}:
            raise HybridFormatError(f"anchors: unknown super-node id {raw_id!r}")
        if pts:
            points[nid] = tuple((float(p[0]), float(p[1])) for p in pts)
    return HybridGraph(tuple(supers), tuple(atoms), tuple(bonds)), AnchorSet(points)


# -- COCO-style ingestion ---------------------------------------------------------

COCO_CATEGORIES = {
    0: "Arrow", 1: "Conditions", 2: "FunctionalGroup", 3: "Plus",
    4: "Products", 5: "Reactants", 6: "Bond", 7: "Anchor",
}
PLACEHOLDER_LABEL = "FunctionalGroup"


def hybrid_from_coco(coco: Mapping[str, Any], image_id: int, normalize: bool = False
                     ) -> tuple[HybridGraph, AnchorSet]:
    """Build a hybrid graph from one image of a COCO-style annotation file.

    FunctionalGroup boxes become super-nodes labelled with the placeholder
    class name (the published files carry no group class). Each Bond box
    joins the two node boxes it overlaps most; bond order is not annotated
    and defaults to SINGLE. Each Anchor keypoint goes to the box containing
    it (smallest such box on ties). ``normalize`` rescales pixels to 0-1000.
    """
    image = next((im for im in coco.get("images", []) if im["id"] == image_id), None)
    if image is None:
        raise HybridFormatError(f"image_id {image_id} not found")
    sx = CANVAS / image["width"] if normalize else 1.0
    sy = CANVAS / image["height"] if normalize else 1.0
    anns = [a for a in coco.get("annotations", []) if a["image_id"] == image_id]

    def box(a) -> BBox:
        x, y, w, h = a["bbox"]
        return BBox(x * sx, y * sy, (x + w) * sx, (y + h) * sy)

    groups = [(f"FG_{a['id']}", box(a)) for a in anns if a["category_id"] == 2]
    supers = tuple(SuperNode(gid, PLACEHOLDER_LABEL, b) for gid, b in groups)
    bonds = []
    for a in anns:
        if a["category_id"] != 6:
            continue
        bb = box(a)
        hits = sorted(((bb.intersection(b), gid) for gid, b in groups), key=lambda t: (-t[0], t[1]))
        hits = [h for h in hits if h[0] > 0]
        if len(hits) < 2:
            raise HybridFormatError(f"bond annotation {a['id']} touches fewer than two nodes")
        u, v = sorted((hits[0][1], hits[1][1]), key=lambda s: int(s[3:]))
        bonds.append(HybridBond(u, v, "SINGLE"))
    points: dict[str, list[tuple[float, float]]] = {}
    for a in anns:
        if a["category_id"] != 7:
            continue
        kx, ky = a["keypoints"][:2]
        pt = (kx * sx, ky * sy)
        owners = [(b.area, gid) for gid, b in groups if b.contains(pt)]
        if not owners:
            raise HybridFormatError(f"anchor annotation {a['id']} lies outside every group box")
        points.setdefault(min(owners)[1], []).append(pt)
    return (HybridGraph(supers, (), tuple(bonds)),
            AnchorSet({k: tuple(v) for k, v in points.items()}))

"""Synthetic training data: molecule-anchor samples, reaction layouts, COCO files and SVG.

Every sample is a scene of drawing primitives plus COCO-style annotations in
raw pixel coordinates. Text glyph extents use a fixed metric model: a label
of ``n`` characters in font size ``f`` spans ``0.6 * f * n`` by ``f`` pixels,
centred on its anchor point (``text-anchor: middle``, ``dominant-baseline:
central``). Boxes are computed from that model, so every annotated box
encloses the glyphs it covers.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .anchor import (ATOM_RADIUS, CANVAS, BBox, atom_label, canvas_positions,
                     compute_anchors)
from .fgdict import decompose, default_dictionary
from .molgraph import BondOrder, ChemError, MolecularGraph, generate_2d_coords, parse_smiles, sanitize
from .molgraph.layout import OVERLAP_FLAG
from .reaction import ReactionRecord

log = logging.getLogger(__name__)

CATEGORIES = (
    (0, "Arrow"), (1, "Conditions"), (2, "FunctionalGroup"), (3, "Plus"),
    (4, "Products"), (5, "Reactants"), (6, "Bond"), (7, "Anchor"),
)
CAT = {name: cid for cid, name in CATEGORIES}
ARCHETYPES = ("Linear", "MultiLine", "TreeGraph")
DEFAULT_MIX = (0.70, 0.15, 0.15)
OVERLAP_TOLERANCE = 2.0
MAX_CANVAS = 4000
GLYPH_ASPECT = 0.6  # character advance as a fraction of the font size


class GenerationError(ValueError):
    """Layout cannot be placed (too many components, overlap, bad input)."""


class MixError(ValueError):
    """Archetype mix is not a probability vector."""


@dataclass(frozen=True)
class Style:
    name: str
    bond_width: float
    font: str
    show_hydrogens: bool  # heteroatom labels carry their H count


STYLES = (
    Style("classic", 1.5, "Arial", True),
    Style("bold", 2.5, "Helvetica", True),
    Style("minimal", 1.0, "DejaVu Sans", False),
)


# -- scene primitives ----------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    p: tuple[float, float]
    q: tuple[float, float]
    width: float
    dashed: bool = False


@dataclass(frozen=True)
class Text:
    xy: tuple[float, float]
    text: str
    size: float
    font: str

    def extent(self) -> BBox:
        hw = 0.5 * GLYPH_ASPECT * self.size * len(self.text)
        hh = 0.5 * self.size
        return BBox(self.xy[0] - hw, self.xy[1] - hh, self.xy[0] + hw, self.xy[1] + hh)


@dataclass(frozen=True)
class Polyline:
    points: tuple[tuple[float, float], ...]
    width: float
    filled: bool = False  # closed, filled polygon (arrowheads)


Primitive = Union[Line, Text, Polyline]


@dataclass(frozen=True)
class Annotation:
    category_id: int
    bbox: tuple[float, float, float, float]  # x, y, w, h in pixels
    keypoints: tuple[int, int, int] | None = None
    parent: int | None = None  # index of the owning annotation (anchors only; not exported)
    primitives: tuple[int, ...] = ()  # scene primitives this box covers

    @property
    def box(self) -> BBox:
        x, y, w, h = self.bbox
        return BBox(x, y, x + w, y + h) if w > 0 and h > 0 else BBox(x, y, x + 1e-9, y + 1e-9)


@dataclass(frozen=True)
class Provenance:
    source: str
    archetype: str
    seed: int
    style: str = ""


@dataclass(frozen=True)
class DatasetSample:
    width: int
    height: int
    annotations: tuple[Annotation, ...] = ()
    primitives: tuple[Primitive, ...] = ()
    provenance: Provenance = Provenance("", "", 0)
    file_name: str = ""

    def counts(self) -> dict[str, int]:
        names = dict(CATEGORIES)
        out: dict[str, int] = {}
        for a in self.annotations:
            out[names[a.category_id]] = out.get(names[a.category_id], 0) + 1
        return out


def _r(v: float) -> float:
    return round(float(v), 4)


def _xywh(b: BBox) -> tuple[float, float, float, float]:
    return (_r(b.x1), _r(b.y1), _r(b.x2 - b.x1), _r(b.y2 - b.y1))


def _union(boxes: Iterable[BBox]) -> BBox:
    boxes = list(boxes)
    return BBox(min(b.x1 for b in boxes), min(b.y1 for b in boxes),
                max(b.x2 for b in boxes), max(b.y2 for b in boxes))


def _inflate(b: BBox, d: float) -> BBox:
    return BBox(b.x1 - d, b.y1 - d, b.x2 + d, b.y2 + d)


def primitive_extent(p: Primitive) -> BBox:
    if isinstance(p, Text):
        return p.extent()
    pts = (p.p, p.q) if isinstance(p, Line) else p.points
    hw = p.width / 2
    return BBox(min(x for x, _ in pts) - hw, min(y for _, y in pts) - hw,
                max(x for x, _ in pts) + hw, max(y for _, y in pts) + hw)


def normalize_annotations(sample: DatasetSample) -> list[dict]:
    """COCO records rescaled from pixels to the 0-1000 frame."""
    sx, sy = CANVAS / sample.width, CANVAS / sample.height
    out = []
    for a in sample.annotations:
        x, y, w, h = a.bbox
        rec = {"category_id": a.category_id, "bbox": [_r(x * sx), _r(y * sy), _r(w * sx), _r(h * sy)]}
        if a.keypoints:
            kx, ky, v = a.keypoints
            rec["keypoints"] = [_r(kx * sx), _r(ky * sy), v]
        out.append(rec)
    return out


# -- molecule drawing -------------------------------------------------------------------

def _label(graph: MolecularGraph, i: int, style: Style) -> str:
    atom = graph.atoms[i]
    if atom.element == "C" and atom.charge == 0:
        return ""
    if style.show_hydrogens:
        h = graph.hydrogens(i)
        text = atom.element + ("" if h == 0 else "H" if h == 1 else f"H{h}")
    else:
        text = atom.element
    if atom.charge:
        mag = abs(atom.charge)
        text += ("+" if atom.charge > 0 else "-") + (str(mag) if mag > 1 else "")
    return text


def _fit_font(xy, text: str, size: float, limit: BBox) -> float:
    """Largest font <= size whose glyph extent around xy stays inside limit."""
    x, y = xy
    room_x = min(x - limit.x1, limit.x2 - x)
    room_y = min(y - limit.y1, limit.y2 - y)
    size = min(size, 2 * room_y, 2 * room_x / (GLYPH_ASPECT * len(text)))
    return max(size, 0.0) * 0.999


def molecule_primitives(graph: MolecularGraph, pos: Sequence[tuple[float, float]], bond_px: float,
                        style: Style, label_limits: Sequence[BBox]
                        ) -> tuple[list[Primitive], dict[int, list[int]], dict[int, int]]:
    """Bond lines and atom labels. Returns primitives, bond -> primitive ids, atom -> label id."""
    prims: list[Primitive] = []
    bond_prims: dict[int, list[int]] = {}
    label_prim: dict[int, int] = {}
    font = 0.45 * bond_px
    trims: dict[int, float] = {}
    for i in range(len(graph.atoms)):
        text = _label(graph, i, style)
        if not text:
            continue
        size = _fit_font(pos[i], text, font, label_limits[i])
        if size <= 0:
            continue
        label_prim[i] = len(prims)
        prims.append(Text((_r(pos[i][0]), _r(pos[i][1])), text, _r(size), style.font))
        trims[i] = 0.55 * size
    off = 0.14 * bond_px
    for bi, b in enumerate(graph.bonds):
        p, q = np.array(pos[b.a], float), np.array(pos[b.b], float)
        d = q - p
        length = float(np.linalg.norm(d))
        if length < 1e-9:
            continue
        u = d / length
        ta, tb = trims.get(b.a, 0.0), trims.get(b.b, 0.0)
        if ta + tb >= length * 0.9:
            ta = tb = 0.0
        p, q = p + u * ta, q - u * tb
        n = np.array([-u[1], u[0]])
        if b.order == BondOrder.DOUBLE:
            shifts = [(-off / 2, False), (off / 2, False)]
        elif b.order == BondOrder.TRIPLE:
            shifts = [(-off, False), (0.0, False), (off, False)]
        elif b.order == BondOrder.AROMATIC:
            shifts = [(0.0, False), (off, True)]
        else:
            shifts = [(0.0, False)]
        ids = []
        for s, dashed in shifts:
            a1, a2 = p + n * s, q + n * s
            ids.append(len(prims))
            prims.append(Line((_r(a1[0]), _r(a1[1])), (_r(a2[0]), _r(a2[1])), style.bond_width, dashed))
        bond_prims[bi] = ids
    return prims, bond_prims, label_prim


@lru_cache(maxsize=4096)
def _depiction(smiles: str) -> MolecularGraph:
    g = sanitize(parse_smiles(smiles))
    return g if g.has_coords else generate_2d_coords(g)


def _prepare(graph_or_smiles: MolecularGraph | str) -> MolecularGraph:
    if isinstance(graph_or_smiles, str):
        return _depiction(graph_or_smiles)
    g = graph_or_smiles
    if not g.sanitized:
        raise ChemError("molecule samples need a sanitized graph")
    return g if g.has_coords else generate_2d_coords(g)


# -- molecule samples -----------------------------------------------------------------

def gen_molecule_sample(graph: MolecularGraph | str, seed: int, dictionary=None,
                        source: str = "") -> DatasetSample:
    """FunctionalGroup, Bond and Anchor annotations for one molecule drawing.

    Bond boxes cover bonds that cross a FunctionalGroup boundary (bonds
    between two residual atoms are not annotated, since residual atoms have
    no category of their own).
    """
    from .molgraph import canonical_smiles

    g = _prepare(graph)
    if OVERLAP_FLAG in g.flags:
        raise GenerationError("layout failure: overlapping atoms in the 2D depiction")
    rng = np.random.default_rng(seed)
    style = STYLES[int(rng.integers(len(STYLES)))]
    size = int(rng.integers(200, 501))
    source = source or canonical_smiles(g)
    prov = Provenance(source, "Molecule", seed, style.name)
    if not g.atoms:
        return DatasetSample(size, size, provenance=prov)

    dec = decompose(g, dictionary or default_dictionary())
    hybrid, anchors = compute_anchors(g, dec)
    canvas, cmap = canvas_positions(g)
    s = size / CANVAS
    pos = [(x * s, y * s) for x, y in canvas]
    bond_px = cmap.bond_length * cmap.scale * s

    def px(b: BBox) -> BBox:
        return BBox(b.x1 * s, b.y1 * s, b.x2 * s, b.y2 * s)

    owner = dec.owner()
    residual = sorted(dec.residual_atoms)
    node_box = {n.id: px(n.bbox) for n in hybrid.super_nodes}
    node_box.update({a.id: px(a.bbox) for a in hybrid.residual_atoms})
    atom_node = {a: owner.get(a) or f"A_{residual.index(a) + 1}" for a in range(len(g.atoms))}
    prims, bond_prims, label_prim = molecule_primitives(
        g, pos, bond_px, style, [node_box[atom_node[i]] for i in range(len(g.atoms))])

    anns: list[Annotation] = []
    group_ann: dict[str, int] = {}
    for inst in dec.group_instances:
        covered = [label_prim[a] for a in sorted(inst.atoms) if a in label_prim]
        covered += [pid for bi, b in enumerate(g.bonds)
                    if owner.get(b.a) == owner.get(b.b) == inst.instance_id
                    for pid in bond_prims.get(bi, [])]
        group_ann[inst.instance_id] = len(anns)
        anns.append(Annotation(CAT["FunctionalGroup"], _xywh(node_box[inst.instance_id]),
                               primitives=tuple(sorted(covered))))
    for bi, b in enumerate(g.bonds):
        u, v = atom_node[b.a], atom_node[b.b]
        if u == v or not (b.a in owner or b.b in owner):
            continue
        ids = bond_prims.get(bi, [])
        seg = BBox(min(pos[b.a][0], pos[b.b][0]), min(pos[b.a][1], pos[b.b][1]),
                   max(pos[b.a][0], pos[b.b][0]) + 1e-9, max(pos[b.a][1], pos[b.b][1]) + 1e-9)
        box = _union([seg, *(primitive_extent(prims[i]) for i in ids)])
        anns.append(Annotation(CAT["Bond"], _xywh(box), primitives=tuple(ids)))
    for gid, pts in sorted(anchors.points.items(), key=lambda kv: group_ann[kv[0]]):
        for x, y in pts:
            kx, ky = int(round(x * s)), int(round(y * s))
            anns.append(Annotation(CAT["Anchor"], (kx, ky, 0, 0), (kx, ky, 2), parent=group_ann[gid]))
    return DatasetSample(size, size, tuple(anns), tuple(prims), prov)


# -- reaction layouts -------------------------------------------------------------------

@dataclass
class _Token:
    role: str  # Reactants, Products, Plus, Arrow
    w: float
    h: float
    smiles: str = ""
    x: float = 0.0  # top-left once placed
    y: float = 0.0

    @property
    def box(self) -> BBox:
        return BBox(self.x, self.y, self.x + self.w, self.y + self.h)


@dataclass(frozen=True)
class _Params:
    style: Style
    bond_px: float
    gap: float
    plus_font: float
    cond_font: float
    arrow_len: float
    max_row: float


def _params(rng: np.random.Generator) -> _Params:
    style = STYLES[int(rng.integers(len(STYLES)))]
    return _Params(style, float(rng.uniform(14.0, 22.0)), float(rng.uniform(8.0, 16.0)),
                   float(rng.uniform(14.0, 20.0)), float(rng.uniform(9.0, 12.0)),
                   float(rng.uniform(40.0, 70.0)), float(rng.uniform(300.0, 600.0)))


def _mol_size(smiles: str, bond_px: float) -> tuple[float, float]:
    g = _depiction(smiles)
    if not g.atoms:
        raise GenerationError(f"empty structure {smiles!r}")
    c = np.array([a.coord_2d for a in g.atoms], float)
    span = c.max(axis=0) - c.min(axis=0)
    margin = 2 * 0.6 * bond_px
    return float(span[0] * bond_px + margin), float(span[1] * bond_px + margin)


def _condition_lines(record: ReactionRecord) -> list[str]:
    return [line for line in (", ".join(record.reagents), ", ".join(record.solvents)) if line]


def _text_block(lines: Sequence[str], font: float) -> tuple[float, float]:
    return (max(GLYPH_ASPECT * font * len(t) for t in lines) + 4, 1.2 * font * len(lines) + 4)


def _side_tokens(smiles: Sequence[str], role: str, p: _Params) -> list[_Token]:
    out: list[_Token] = []
    for k, s in enumerate(smiles):
        if k:
            out.append(_Token("Plus", GLYPH_ASPECT * p.plus_font + 2, p.plus_font + 2))
        w, h = _mol_size(s, p.bond_px)
        out.append(_Token(role, w, h, s))
    return out


def _place_row(tokens: Sequence[_Token], x: float, mid: float, gap: float) -> float:
    for t in tokens:
        t.x, t.y = x, mid - t.h / 2
        x += t.w + gap
    return x - gap


def _wrap(tokens: list[_Token], max_row: float, gap: float) -> list[list[_Token]]:
    rows: list[list[_Token]] = [[]]
    width = 0.0
    for t in tokens:
        extra = t.w + (gap if rows[-1] else 0)
        # Never start a row with a plus sign.
        if rows[-1] and t.role != "Plus" and width + extra > max_row and rows[-1][-1].role == "Plus":
            rows.append([])
            width = 0.0
            extra = t.w
        rows[-1].append(t)
        width += extra
    return rows


def gen_reaction_layout(record: ReactionRecord, archetype: str, seed: int) -> DatasetSample:
    if archetype not in ARCHETYPES:
        raise GenerationError(f"unknown archetype {archetype!r}")
    if not record.reactants or not record.products:
        raise GenerationError("reaction needs at least one reactant and one product")
    rng = np.random.default_rng(seed)
    p = _params(rng)
    try:
        left = _side_tokens(record.reactants, "Reactants", p)
        right = _side_tokens(record.products, "Products", p)
    except ChemError as exc:
        raise GenerationError(f"unparseable component: {exc}") from exc
    cond_lines = _condition_lines(record)
    cw, ch = _text_block(cond_lines, p.cond_font) if cond_lines else (0.0, 0.0)
    head = max(4.0, 2.5 * p.style.bond_width)

    arrow_paths: list[tuple[tuple[float, float], ...]] = []
    heads: list[tuple[tuple[float, float], ...]] = []
    cond_box: BBox | None = None

    def arrow_head(tip, direction):
        ux, uy = direction
        bx, by = tip[0] - ux * 2 * head, tip[1] - uy * 2 * head
        return ((tip[0], tip[1]), (bx - uy * head, by + ux * head), (bx + uy * head, by - ux * head))

    if archetype in ("Linear", "MultiLine"):
        alen = max(p.arrow_len, cw + 10)
        arrow = _Token("Arrow", alen, 2 * head)
        if archetype == "Linear":
            rows = [left + [arrow] + right]
        else:
            rows = _wrap(left, p.max_row, p.gap) + _wrap(right, p.max_row, p.gap)
            rows[len(_wrap(left, p.max_row, p.gap)) - 1].append(arrow)
        y = 0.0
        for row in rows:
            above = ch + 4 if arrow in row and cond_lines else 0.0
            row_h = max(max(t.h for t in row), 2 * (2 * head + above))
            _place_row(row, 0.0, y + row_h / 2, p.gap)
            y += row_h + 2 * p.gap
        mid = arrow.y + arrow.h / 2
        arrow_paths.append(((arrow.x, mid), (arrow.x + arrow.w - 2 * head, mid)))
        heads.append(arrow_head((arrow.x + arrow.w, mid), (1.0, 0.0)))
        if cond_lines:
            cx = arrow.x + arrow.w / 2
            cond_box = BBox(cx - cw / 2, arrow.y - 3 - ch, cx + cw / 2, arrow.y - 3)
        tokens = [t for row in rows for t in row]
    else:  # TreeGraph: stacked columns joined by a branching arrow
        def stack(col: list[_Token]) -> float:
            cw_ = max(t.w for t in col)
            yy = 0.0
            for t in col:
                t.x, t.y = (cw_ - t.w) / 2, yy
                yy += t.h + p.gap
            return cw_

        lw = stack(left)
        rw = stack(right)
        lh = max(t.box.y2 for t in left)
        rh = max(t.box.y2 for t in right)
        dy = (lh - rh) / 2  # centre the shorter column
        for t in (right if dy > 0 else left):
            t.y += abs(dy)
        span = max(p.arrow_len, cw + 2 * p.gap) + 2 * p.gap
        x0 = lw + p.gap
        x1 = x0 + span
        for t in right:
            t.x += x1 + p.gap
        trunk = x0 + span / 2
        lys = [t.y + t.h / 2 for t in left if t.role == "Reactants"]
        rys = [t.y + t.h / 2 for t in right if t.role == "Products"]
        for y in lys:
            arrow_paths.append(((x0, y), (trunk, y)))
        ys = lys + rys
        arrow_paths.append(((trunk, min(ys)), (trunk, max(ys))))
        for y in rys:
            arrow_paths.append(((trunk, y), (x1 - 2 * head, y)))
            heads.append(arrow_head((x1, y), (1.0, 0.0)))
        pts = [pt for path in arrow_paths + heads for pt in path]
        abox = BBox(x0, min(y for _, y in pts) - head, x1, max(y for _, y in pts) + head)
        arrow = _Token("Arrow", abox.width, abox.height, x=abox.x1, y=abox.y1)
        if cond_lines:
            cond_box = BBox(trunk - cw / 2, abox.y2 + 3, trunk + cw / 2, abox.y2 + 3 + ch)
        tokens = left + [arrow] + right

    # Shift everything into a margin-padded pixel frame.
    boxes = [t.box for t in tokens] + ([cond_box] if cond_box else [])
    frame = _union(boxes)
    margin = 10.0
    ox, oy = margin - frame.x1, margin - frame.y1
    width = int(math.ceil(frame.width + 2 * margin))
    height = int(math.ceil(frame.height + 2 * margin))
    if width > MAX_CANVAS or height > MAX_CANVAS:
        raise GenerationError(f"layout needs a {width}x{height} canvas (limit {MAX_CANVAS})")

    def mv(pt):
        return (_r(pt[0] + ox), _r(pt[1] + oy))

    prims: list[Primitive] = []
    anns: list[Annotation] = []
    order = {"Reactants": 0, "Plus": 1, "Arrow": 2, "Products": 3}
    for t in tokens:
        box = BBox(t.x + ox, t.y + oy, t.x + t.w + ox, t.y + t.h + oy)
        start = len(prims)
        if t.role in ("Reactants", "Products"):
            prims.extend(_draw_in_box(t.smiles, box, p))
        elif t.role == "Plus":
            prims.append(Text(mv((t.x + t.w / 2, t.y + t.h / 2)), "+", _r(p.plus_font), p.style.font))
        else:
            for path in arrow_paths:
                prims.append(Polyline(tuple(mv(pt) for pt in path), p.style.bond_width))
            for hd in heads:
                prims.append(Polyline(tuple(mv(pt) for pt in hd), p.style.bond_width, True))
            box = _inflate(_union([box] + [primitive_extent(pr) for pr in prims[start:]]), 0.0)
        anns.append(Annotation(CAT[t.role], _xywh(box), primitives=tuple(range(start, len(prims)))))
    if cond_box is not None:
        start = len(prims)
        cb = BBox(cond_box.x1 + ox, cond_box.y1 + oy, cond_box.x2 + ox, cond_box.y2 + oy)
        for k, line in enumerate(cond_lines):
            cy = cb.y1 + 2 + 1.2 * p.cond_font * (k + 0.5)
            prims.append(Text(mv((cond_box.x1 + cond_box.width / 2, cy - oy)), line,
                              _r(p.cond_font), p.style.font))
        anns.append(Annotation(CAT["Conditions"], _xywh(cb), primitives=tuple(range(start, len(prims)))))
    anns.sort(key=lambda a: (a.box.x1, a.box.y1))
    _check_overlap(anns)
    source = ".".join(record.reactants) + ">" + ";".join(cond_lines) + ">" + ".".join(record.products)
    return DatasetSample(width, height, tuple(anns), tuple(prims),
                         Provenance(source, archetype, seed, p.style.name))


def _draw_in_box(smiles: str, box: BBox, p: _Params) -> list[Primitive]:
    g = _depiction(smiles)
    c = np.array([a.coord_2d for a in g.atoms], float)
    mid = (c.max(axis=0) + c.min(axis=0)) / 2
    cx, cy = box.center
    pos = [(cx + (x - mid[0]) * p.bond_px, cy - (y - mid[1]) * p.bond_px) for x, y in c]
    prims, _, _ = molecule_primitives(g, pos, p.bond_px, p.style, [box] * len(g.atoms))
    return prims


def _check_overlap(anns: Sequence[Annotation]) -> None:
    for i in range(len(anns)):
        for j in range(i + 1, len(anns)):
            a, b = anns[i].box, anns[j].box
            ix = min(a.x2, b.x2) - max(a.x1, b.x1)
            iy = min(a.y2, b.y2) - max(a.y1, b.y1)
            if ix > OVERLAP_TOLERANCE and iy > OVERLAP_TOLERANCE:
                raise GenerationError(f"annotation boxes {i} and {j} overlap")


# -- SVG ---------------------------------------------------------------------------------

def _f(v: float) -> str:
    return f"{v:.2f}"


def render_svg(sample: DatasetSample) -> str:
    w, h = sample.width, sample.height
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>']
    for pr in sample.primitives:
        if isinstance(pr, Line):
            dash = ' stroke-dasharray="3,2"' if pr.dashed else ""
            out.append(f'<line x1="{_f(pr.p[0])}" y1="{_f(pr.p[1])}" x2="{_f(pr.q[0])}" y2="{_f(pr.q[1])}" '
                       f'stroke="#000000" stroke-width="{_f(pr.width)}"{dash}/>')
        elif isinstance(pr, Text):
            text = pr.text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            out.append(f'<text x="{_f(pr.xy[0])}" y="{_f(pr.xy[1])}" font-family="{pr.font}" '
                       f'font-size="{_f(pr.size)}" text-anchor="middle" dominant-baseline="central">'
                       f'{text}</text>')
        else:
            pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in pr.points)
            if pr.filled:
                out.append(f'<polygon points="{pts}" fill="#000000"/>')
            else:
                out.append(f'<polyline points="{pts}" fill="none" stroke="#000000" '
                           f'stroke-width="{_f(pr.width)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- batches -----------------------------------------------------------------------------

Source = Union[str, ReactionRecord]


def parse_mix(text: str | Sequence[float]) -> tuple[float, float, float]:
    vals = [float(v) for v in (text.split(",") if isinstance(text, str) else text)]
    if len(vals) != 3 or any(v < 0 or not math.isfinite(v) for v in vals):
        raise MixError(f"mix needs three non-negative probabilities (got {text!r})")
    if abs(sum(vals) - 1.0) > 1e-6:
        raise MixError(f"mix must sum to 1 (got {sum(vals)})")
    return tuple(vals)  # type: ignore[return-value]


def parse_reaction_smiles(text: str) -> ReactionRecord:
    """``reactants>conditions>products``; components split on '.', conditions on ';'."""
    parts = text.strip().split(">")
    if len(parts) != 3:
        raise GenerationError(f"not a reaction SMILES: {text!r}")
    from .reaction import split_conditions
    reagents, solvents = split_conditions([c for c in parts[1].split(";") if c.strip()])
    return ReactionRecord(1, tuple(s for s in parts[0].split(".") if s),
                          tuple(s for s in parts[2].split(".") if s), reagents, solvents)


@dataclass(frozen=True)
class ManifestEntry:
    index: int
    seed: int
    archetype: str
    source: str
    status: str  # "ok" or "skipped"
    reason: str = ""


@dataclass
class Dataset:
    samples: list[DatasetSample | None]
    manifest: list[ManifestEntry]
    mix: tuple[float, float, float] = DEFAULT_MIX
    base_seed: int = 0

    def archetype_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m in self.manifest:
            out[m.archetype] = out.get(m.archetype, 0) + 1
        return out


def _one(i: int, sources: Sequence[Source], mix, base_seed: int, dictionary
         ) -> tuple[DatasetSample | None, ManifestEntry]:
    seed = base_seed ^ i
    rng = np.random.default_rng(seed)
    archetype = ARCHETYPES[int(rng.choice(3, p=mix))]
    src = sources[int(rng.integers(len(sources)))]
    sub_seed = int(rng.integers(2**31))
    if isinstance(src, str):
        archetype, label = "Molecule", src
    else:
        label = ".".join(src.reactants) + ">>" + ".".join(src.products)
    try:
        if isinstance(src, str):
            sample = gen_molecule_sample(src, sub_seed, dictionary, source=src)
        else:
            sample = gen_reaction_layout(src, archetype, sub_seed)
    except (GenerationError, ChemError) as exc:
        return None, ManifestEntry(i, seed, archetype, label, "skipped", str(exc))
    sample = DatasetSample(sample.width, sample.height, sample.annotations, sample.primitives,
                           sample.provenance, f"{i:06d}.svg")
    return sample, ManifestEntry(i, seed, archetype, label, "ok")


def generate_batch(sources: Sequence[Source], n: int, mix=DEFAULT_MIX, seed: int = 0,
                   jobs: int = 1, dictionary=None) -> Dataset:
    """n samples; sample i uses seed ``seed ^ i`` to pick archetype, source and style.

    Molecule sources (SMILES strings) yield molecule-anchor samples; reaction
    sources yield layouts of the drawn archetype.
    """
    mix = parse_mix(mix)
    if n and not sources:
        raise GenerationError("no sources to sample from")
    dictionary = dictionary or default_dictionary()
    work = lambda i: _one(i, sources, mix, seed, dictionary)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(work, range(n)))
    else:
        results = [work(i) for i in range(n)]
    return Dataset([r[0] for r in results], [r[1] for r in results], mix, seed)


def coco_document(dataset: Dataset) -> dict:
    images, annotations = [], []
    ann_id = 0
    for m, s in zip(dataset.manifest, dataset.samples):
        if s is None:
            continue
        images.append({"id": m.index, "width": s.width, "height": s.height, "file_name": s.file_name})
        for a in s.annotations:
            rec = {"id": ann_id, "image_id": m.index, "category_id": a.category_id, "bbox": list(a.bbox)}
            if a.keypoints is not None:
                rec["keypoints"] = list(a.keypoints)
            annotations.append(rec)
            ann_id += 1
    return {"images": images,
            "categories": [{"id": cid, "name": name} for cid, name in CATEGORIES],
            "annotations": annotations, "relations": []}


def manifest_document(dataset: Dataset) -> dict:
    return {
        "base_seed": dataset.base_seed,
        "mix": dict(zip(ARCHETYPES, dataset.mix)),
        "counts": dict(sorted(dataset.archetype_counts().items())),
        "ok": sum(m.status == "ok" for m in dataset.manifest),
        "skipped": sum(m.status == "skipped" for m in dataset.manifest),
        "samples": [m.__dict__ for m in dataset.manifest],
    }


def write_dataset(dataset: Dataset, out_dir: str | Path, svg: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump = lambda obj: json.dumps(obj, indent=1, sort_keys=False, ensure_ascii=False) + "\n"
    (out / "annotations.json").write_text(dump(coco_document(dataset)), encoding="utf-8")
    (out / "manifest.json").write_text(dump(manifest_document(dataset)), encoding="utf-8")
    if svg:
        img = out / "images"
        img.mkdir(exist_ok=True)
        for s in dataset.samples:
            if s is not None:
                (img / s.file_name).write_text(render_svg(s), encoding="utf-8")

"""Reaction-diagram layouts: grouping, reading order, crops and record assembly."""

from __future__ import annotations

import logging
import math
import re
import statistics
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .anchor import CANVAS, BBox

log = logging.getLogger(__name__)

ROLES = ("Reactant", "Product", "Condition", "Arrow", "Plus")
COCO_ROLES = {0: "Arrow", 1: "Condition", 3: "Plus", 4: "Product", 5: "Reactant"}
ROW_GAP_FACTOR = 1.5

DEFAULT_SOLVENTS = frozenset({
    "water", "h2o", "toluene", "thf", "tetrahydrofuran", "dioxane", "1,4-dioxane",
    "dmf", "dmso", "meoh", "methanol", "etoh", "ethanol",
})


class LayoutError(ValueError):
    """Malformed layout element."""


class RecognitionFailure:
    """Marker for a structure the recognizer could not read."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "RECOGNITION_FAILURE"


RECOGNITION_FAILURE = RecognitionFailure()
FAILURE_PLACEHOLDER = "*"


@dataclass(frozen=True)
class DiagramElement:
    reaction_id: int
    role: str
    box: BBox
    element_id: str = ""  # stable key for structure/condition lookups
    index: int = 0  # input position, the final ordering tie-break

    def __post_init__(self):
        if self.role not in ROLES:
            raise LayoutError(f"unknown role {self.role!r}")
        if self.reaction_id < 1:
            raise LayoutError(f"reaction_id must be >= 1 (got {self.reaction_id})")

    @property
    def key(self) -> str:
        return self.element_id or f"e{self.index}"


@dataclass(frozen=True)
class ReactionGroup:
    reaction_id: int
    reactants: tuple[DiagramElement, ...] = ()
    products: tuple[DiagramElement, ...] = ()
    conditions: tuple[DiagramElement, ...] = ()
    arrows: tuple[DiagramElement, ...] = ()
    pluses: tuple[DiagramElement, ...] = ()
    warnings: tuple[str, ...] = ()

    def role_counts(self) -> dict[str, int]:
        return {"Reactant": len(self.reactants), "Product": len(self.products),
                "Condition": len(self.conditions), "Arrow": len(self.arrows),
                "Plus": len(self.pluses)}


@dataclass(frozen=True)
class ReactionRecord:
    reaction_id: int
    reactants: tuple[str, ...]
    products: tuple[str, ...]
    reagents: tuple[str, ...] = ()
    solvents: tuple[str, ...] = ()
    failures: tuple[str, ...] = ()  # element keys whose structure was unreadable

    @property
    def complete(self) -> bool:
        return bool(self.reactants) and bool(self.products)


# -- reading order -------------------------------------------------------------------

def reading_order(elements: Sequence[DiagramElement]) -> list[DiagramElement]:
    """Row bands by y-center gaps (> 1.5x median height), then x, then y, then input index."""
    if not elements:
        return []
    med_h = statistics.median(e.box.height for e in elements)
    by_y = sorted(elements, key=lambda e: (e.box.center[1], e.index))
    band: dict[int, int] = {}
    current, prev_y = 0, None
    for e in by_y:
        y = e.box.center[1]
        if prev_y is not None and y - prev_y > ROW_GAP_FACTOR * med_h:
            current += 1
        band[id(e)] = current
        prev_y = y
    return sorted(elements, key=lambda e: (band[id(e)], e.box.center[0], e.box.center[1], e.index))


def parse_layout(elements: Iterable[DiagramElement]) -> list[ReactionGroup]:
    """Bucket elements by reaction id; each role list follows reading order."""
    buckets: dict[int, list[DiagramElement]] = {}
    for e in elements:
        buckets.setdefault(e.reaction_id, []).append(e)
    out = []
    for rid in sorted(buckets):
        ordered = reading_order(buckets[rid])
        pick = lambda role: tuple(e for e in ordered if e.role == role)
        warnings = []
        if pick("Arrow") and not pick("Reactant"):
            warnings.append(f"reaction {rid}: arrow without reactants")
            log.warning(warnings[-1])
        out.append(ReactionGroup(rid, pick("Reactant"), pick("Product"), pick("Condition"),
                                 pick("Arrow"), pick("Plus"), tuple(warnings)))
    return out


def elements_from_records(records: Iterable[Mapping[str, Any]]) -> list[DiagramElement]:
    """Read the layout-prompt output shape: {reaction_id, role, bbox[, id]} records."""
    out = []
    for i, r in enumerate(records):
        try:
            x1, y1, x2, y2 = (float(v) for v in r["bbox"])
            out.append(DiagramElement(int(r["reaction_id"]), str(r["role"]),
                                      BBox(x1, y1, x2, y2), str(r.get("id", "")), i))
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"record {i}: {exc}") from exc
    return out


def elements_from_coco(coco: Mapping[str, Any], image_id: int) -> list[DiagramElement]:
    """Layout elements of one COCO-style image.

    The annotation files carry no reaction ids; with one arrow every element
    belongs to reaction 1, otherwise each arrow is its own reaction and
    elements join the arrow nearest to their box center.
    """
    anns = [a for a in coco.get("annotations", [])
            if a["image_id"] == image_id and a["category_id"] in COCO_ROLES]
    boxes = [(a, BBox.from_xywh(*a["bbox"])) for a in anns]
    arrows = [(a, b) for a, b in boxes if COCO_ROLES[a["category_id"]] == "Arrow"]
    arrows.sort(key=lambda ab: (ab[1].center[0], ab[1].center[1]))
    out = []
    for i, (a, b) in enumerate(boxes):
        role = COCO_ROLES[a["category_id"]]
        rid = 1
        if len(arrows) > 1:
            if role == "Arrow":
                rid = 1 + next(k for k, (aa, _) in enumerate(arrows) if aa is a)
            else:
                d = [math.dist(b.center, ab.center) for _, ab in arrows]
                rid = 1 + d.index(min(d))
        out.append(DiagramElement(rid, role, b, str(a["id"]), i))
    return out


# -- crops ---------------------------------------------------------------------------

def crop(box: BBox, canvas: tuple[int, int]) -> tuple[int, int, int, int]:
    """Pixel rectangle for a 0-1000 box: de-normalize, round outward, clamp."""
    w, h = canvas
    if w <= 0 or h <= 0:
        raise ValueError("canvas dimensions must be positive")
    x1 = max(0, min(w - 1, math.floor(box.x1 * w / CANVAS + 1e-9)))
    y1 = max(0, min(h - 1, math.floor(box.y1 * h / CANVAS + 1e-9)))
    x2 = max(x1 + 1, min(w, math.ceil(box.x2 * w / CANVAS - 1e-9)))
    y2 = max(y1 + 1, min(h, math.ceil(box.y2 * h / CANVAS - 1e-9)))
    return x1, y1, x2, y2


def normalize_rect(rect: Sequence[float], canvas: tuple[int, int]) -> BBox:
    """Pixel rectangle (x1, y1, x2, y2) -> 0-1000 box."""
    w, h = canvas
    x1, y1, x2, y2 = rect
    return BBox(x1 * CANVAS / w, y1 * CANVAS / h, x2 * CANVAS / w, y2 * CANVAS / h)


# -- conditions and assembly ---------------------------------------------------------

_SPLIT = re.compile(r"\s*[;/]\s*|\s*,(?!\d)\s*")


def split_conditions(texts: Iterable[str], lexicon: Iterable[str] = DEFAULT_SOLVENTS
                     ) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Split condition texts on ',', '/' and ';' into (reagents, solvents) by lexicon."""
    solvents_lc = {s.lower() for s in lexicon}
    reagents: list[str] = []
    solvents: list[str] = []
    for text in texts:
        for token in _SPLIT.split(text.strip()):
            token = token.strip()
            if not token:
                continue
            (solvents if token.lower() in solvents_lc else reagents).append(token)
    return tuple(reagents), tuple(solvents)


def _lookup(table: Mapping, element: DiagramElement):
    for k in (element.key, element.box):
        if k in table:
            return table[k]
    return None


def assemble_reaction(groups: Sequence[ReactionGroup],
                      structures: Mapping[Any, str | RecognitionFailure],
                      condition_texts: Mapping[Any, str] | None = None,
                      lexicon: Iterable[str] = DEFAULT_SOLVENTS) -> list[ReactionRecord]:
    """Records with reactants/products in layout order and conditions split by lexicon.

    ``structures`` and ``condition_texts`` are keyed by element key or box.
    A missing or failed structure becomes a placeholder entry listed in
    ``failures``.
    """
    condition_texts = condition_texts or {}
    lexicon = tuple(lexicon)
    records = []
    for g in groups:
        failures = []

        def smiles_of(e: DiagramElement) -> str:
            s = _lookup(structures, e)
            if s is None or s is RECOGNITION_FAILURE:
                failures.append(e.key)
                return FAILURE_PLACEHOLDER
            return s

        reactants = tuple(smiles_of(e) for e in g.reactants)
        products = tuple(smiles_of(e) for e in g.products)
        texts = [t for t in (_lookup(condition_texts, e) for e in g.conditions) if t]
        reagents, solvents = split_conditions(texts, lexicon)
        records.append(ReactionRecord(g.reaction_id, reactants, products, reagents, solvents,
                                      tuple(failures)))
    return records

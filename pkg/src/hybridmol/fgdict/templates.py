"""Functional-group templates and the bundled dictionary loader."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..molgraph import Atom, Bond, BondOrder, MolecularGraph
from ..molgraph.elements import HALOGENS, is_element
from ..molgraph.layout import generate_2d_coords

HALOGEN_VARIANTS = ("Cl", "F", "Br", "I")  # first entry is the default instantiation
ANY_BOND = "any"


class DictionaryError(ValueError):
    """Malformed priority list or fragment definition."""


@dataclass(frozen=True)
class PatternAtom:
    element: str  # symbol, "X" (halogen) or "*" (any)
    aromatic: bool | None = False  # None: either
    charge: int | None = 0  # None: any
    h: int | None = None
    hmin: int | None = None
    hmax: int | None = None
    deg: int | None = None
    hdeg: int | None = None
    ring: bool | None = None
    sat: bool = False
    ctx: bool = False

    def element_ok(self, element: str) -> bool:
        if self.element == "*":
            return True
        if self.element == "X":
            return element in HALOGENS
        return element == self.element


@dataclass(frozen=True)
class PatternBond:
    a: int
    b: int
    order: BondOrder | str
    ring: bool | None = None


@dataclass(frozen=True)
class FunctionalGroupTemplate:
    name: str
    priority_rank: int
    atoms: tuple[PatternAtom, ...]
    bonds: tuple[PatternBond, ...]
    attach: tuple[int, ...]  # pattern indices of attachment-capable core atoms
    core: tuple[int, ...] = field(init=False)
    pattern: MolecularGraph = field(init=False, compare=False, repr=False)
    canonical_coords: np.ndarray = field(init=False, compare=False, repr=False)
    direction_vectors: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        core = tuple(i for i, a in enumerate(self.atoms) if not a.ctx)
        object.__setattr__(self, "core", core)
        if not self.attach:
            raise DictionaryError(f"{self.name}: no attachment candidates")
        for i in self.attach:
            if i not in core:
                raise DictionaryError(f"{self.name}: attachment {i} is not a core atom")
        for i in core:
            if self.atoms[i].element == "*":
                raise DictionaryError(f"{self.name}: wildcard element on core atom {i}")
        for b in self.bonds:
            if b.order == ANY_BOND and b.a in core and b.b in core:
                raise DictionaryError(f"{self.name}: 'any' bond inside the core")
        pattern = self._core_graph(variant=None)
        object.__setattr__(self, "pattern", pattern)
        laid = generate_2d_coords(pattern)
        coords = np.array([a.coord_2d for a in laid.atoms], dtype=float)
        coords -= coords.mean(axis=0)
        coords = np.round(coords, 12) + 0.0
        object.__setattr__(self, "canonical_coords", coords)
        dirs = []
        for i in self.attach:
            v = coords[core.index(i)]
            norm = float(np.linalg.norm(v))
            # A candidate sitting on the centroid (single-atom groups) has no
            # intrinsic direction; +x is the documented convention.
            dirs.append(v / norm if norm > 1e-9 else np.array([1.0, 0.0]))
        object.__setattr__(self, "direction_vectors", np.array(dirs).reshape(-1, 2))

    @property
    def attachment_candidates(self) -> tuple[int, ...]:
        """Attachment atoms as indices into :attr:`pattern` (the core graph)."""
        return tuple(self.core.index(i) for i in self.attach)

    @property
    def variable_atoms(self) -> tuple[int, ...]:
        """Core-graph indices whose element is chosen per instance (halogens)."""
        return tuple(k for k, i in enumerate(self.core) if self.atoms[i].element == "X")

    def instance_graph(self, variant: tuple[str, ...] | None = None) -> MolecularGraph:
        return self._core_graph(variant)

    def _core_graph(self, variant) -> MolecularGraph:
        local = {i: k for k, i in enumerate(self.core)}
        atoms = []
        vi = 0
        for i in self.core:
            pa = self.atoms[i]
            element = pa.element
            if element == "X":
                element = variant[vi] if variant else HALOGEN_VARIANTS[0]
                vi += 1
            atoms.append(Atom(index=local[i], element=element, charge=pa.charge or 0,
                              explicit_h=pa.h, is_aromatic=bool(pa.aromatic)))
        bonds = [Bond(local[b.a], local[b.b], b.order) for b in self.bonds
                 if b.a in local and b.b in local]
        return MolecularGraph(tuple(atoms), tuple(bonds))


_KEYS = {"h", "hmin", "hmax", "deg", "hdeg", "charge", "ring", "arom"}


def _parse_atom(tokens: list[str], where: str) -> tuple[int, PatternAtom]:
    if len(tokens) < 3:
        raise DictionaryError(f"{where}: atom line needs an index and an element")
    idx = int(tokens[1])
    sym = tokens[2]
    ctx = "ctx" in tokens[3:]
    kw: dict = {"ctx": ctx, "sat": "sat" in tokens[3:]}
    if sym in ("X", "*"):
        element, aromatic = sym, (None if sym == "*" else False)
        if sym == "*" and not ctx:
            raise DictionaryError(f"{where}: wildcard '*' only allowed on context atoms")
    elif sym.islower():
        element, aromatic = sym.capitalize(), True
    else:
        element, aromatic = sym, False
    if element not in ("X", "*") and not is_element(element):
        raise DictionaryError(f"{where}: unknown element {sym!r}")
    kw["element"] = element
    kw["aromatic"] = aromatic
    if ctx:
        kw["charge"] = None
    for tok in tokens[3:]:
        if tok in ("ctx", "sat"):
            continue
        if "=" not in tok:
            raise DictionaryError(f"{where}: bad token {tok!r}")
        key, val = tok.split("=", 1)
        if key not in _KEYS:
            raise DictionaryError(f"{where}: unknown key {key!r}")
        if key == "arom":
            kw["aromatic"] = None if val == "any" else val == "yes"
        elif key == "ring":
            kw["ring"] = val == "yes"
        elif key == "charge":
            kw["charge"] = None if val == "any" else int(val)
        else:
            kw[key] = int(val)
    return idx, PatternAtom(**kw)


def parse_fragments(text: str) -> dict[str, tuple]:
    """Parse the fragment-definition format into name -> (atoms, bonds, attach)."""
    out: dict[str, tuple] = {}
    name = None
    atoms: dict[int, PatternAtom] = {}
    bonds: list[PatternBond] = []
    attach: list[int] = []

    def flush():
        if name is None:
            return
        if sorted(atoms) != list(range(len(atoms))):
            raise DictionaryError(f"[{name}]: atom indices must be dense from 0")
        out[name] = (tuple(atoms[i] for i in range(len(atoms))), tuple(bonds), tuple(attach))

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {n}"
        if line.startswith("[") and line.endswith("]"):
            flush()
            name = line[1:-1].strip()
            if name in out:
                raise DictionaryError(f"{where}: duplicate fragment {name!r}")
            atoms, bonds, attach = {}, [], []
            continue
        if name is None:
            raise DictionaryError(f"{where}: definition outside a [group] stanza")
        tokens = line.split()
        if tokens[0] == "atom":
            idx, atom = _parse_atom(tokens, where)
            atoms[idx] = atom
        elif tokens[0] == "bond":
            a, b, order = int(tokens[1]), int(tokens[2]), tokens[3]
            ring = None
            for tok in tokens[4:]:
                if tok.startswith("ring="):
                    ring = tok[5:] == "yes"
            bonds.append(PatternBond(a, b, order if order == ANY_BOND else BondOrder(order), ring))
        elif tokens[0] == "attach":
            attach.extend(int(t) for t in tokens[1:])
        else:
            raise DictionaryError(f"{where}: unknown directive {tokens[0]!r}")
    flush()
    return out


def _read_resource(name: str) -> str:
    return resources.files("hybridmol.data").joinpath(name).read_text(encoding="utf-8")


def load_priority_list(document: str | None = None, fragments: str | None = None
                       ) -> dict[str, FunctionalGroupTemplate]:
    """Build the ordered template dictionary from a priority-list document.

    ``document`` is the list text (one name per line, rank = line order);
    None means the shipped default. Blank lines and ``#`` comments are ignored.
    """
    if document is None:
        document = _read_resource("priority_list.txt")
    defs = parse_fragments(fragments if fragments is not None else _read_resource("fragments.txt"))
    out: dict[str, FunctionalGroupTemplate] = {}
    rank = 0
    for raw in document.splitlines():
        name = raw.split("#", 1)[0].strip()
        if not name:
            continue
        if name in out:
            raise DictionaryError(f"duplicate group name {name!r} in priority list")
        if name not in defs:
            raise DictionaryError(f"no pattern definition for group {name!r}")
        rank += 1
        atoms, bonds, attach = defs[name]
        out[name] = FunctionalGroupTemplate(name, rank, atoms, bonds, attach)
    return out


def load_priority_file(path: str | Path) -> dict[str, FunctionalGroupTemplate]:
    return load_priority_list(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_dictionary() -> Mapping[str, FunctionalGroupTemplate]:
    """The shipped 66-group dictionary, built once and read-only."""
    return MappingProxyType(load_priority_list())

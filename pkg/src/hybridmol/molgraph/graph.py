"""Core molecular graph types."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator

from .elements import ATOMIC_NUMBER, allowed_valences, is_element


class ChemError(Exception):
    """Base class for errors raised by the molecular graph core."""


class ParseError(ChemError, ValueError):
    """Malformed SMILES or MOL input.

    ``position`` is a character offset for SMILES and a 1-based line number for
    MOL blocks.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class ContractError(ChemError):
    """An operation was called with input that violates its precondition."""


class BondOrder(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"
    WEDGE = "wedge"
    DASH = "dash"

    @property
    def valence(self) -> int:
        """Contribution to the bond-order sum; aromatic counts as one connection."""
        return _VALENCE[self]

    @property
    def plain(self) -> "BondOrder":
        """Stereo markers collapse to single."""
        if self in (BondOrder.WEDGE, BondOrder.DASH):
            return BondOrder.SINGLE
        return self


_VALENCE = {
    BondOrder.SINGLE: 1,
    BondOrder.WEDGE: 1,
    BondOrder.DASH: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 1,
}


@dataclass(frozen=True)
class Atom:
    index: int
    element: str
    charge: int = 0
    # None means "derive from the valence table"; sanitize fills it in.
    explicit_h: int | None = None
    is_aromatic: bool = False
    coord_2d: tuple[float, float] | None = None

    def __post_init__(self):
        if not is_element(self.element):
            raise ChemError(f"unknown element symbol {self.element!r}")
        if not -4 <= self.charge <= 4:
            raise ChemError(f"formal charge {self.charge} out of range on atom {self.index}")
        if self.explicit_h is not None and self.explicit_h < 0:
            raise ChemError(f"negative hydrogen count on atom {self.index}")

    @property
    def atomic_number(self) -> int:
        return ATOMIC_NUMBER[self.element]


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE

    def __post_init__(self):
        if self.a == self.b:
            raise ChemError(f"self-bond on atom {self.a}")

    @property
    def key(self) -> frozenset[int]:
        return frozenset((self.a, self.b))

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


@dataclass(frozen=True)
class MolecularGraph:
    atoms: tuple[Atom, ...] = ()
    bonds: tuple[Bond, ...] = ()
    sanitized: bool = field(default=False, compare=False)
    flags: frozenset[str] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        for i, atom in enumerate(self.atoms):
            if atom.index != i:
                raise ChemError(f"atom indices must be dense from 0 (got {atom.index} at {i})")
        seen = set()
        n = len(self.atoms)
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ChemError(f"bond ({bond.a}, {bond.b}) references a missing atom")
            if bond.key in seen:
                raise ChemError(f"duplicate bond between atoms {bond.a} and {bond.b}")
            seen.add(bond.key)

    @classmethod
    def build(
        cls,
        atoms: Iterable[dict | Atom],
        bonds: Iterable[tuple[int, int, BondOrder | str] | Bond],
        **kw,
    ) -> "MolecularGraph":
        """Convenience constructor accepting plain tuples/dicts."""
        atom_objs = []
        for i, a in enumerate(atoms):
            atom_objs.append(a if isinstance(a, Atom) else Atom(index=i, **a))
        bond_objs = []
        for b in bonds:
            if isinstance(b, Bond):
                bond_objs.append(b)
            else:
                bond_objs.append(Bond(b[0], b[1], BondOrder(b[2])))
        return cls(tuple(atom_objs), tuple(bond_objs), **kw)

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, BondOrder], ...], ...]:
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        return tuple(tuple(sorted(x, key=lambda t: t[0])) for x in adj)

    @cached_property
    def _bond_index(self) -> dict[frozenset[int], Bond]:
        return {b.key: b for b in self.bonds}

    def neighbors(self, i: int) -> Iterator[int]:
        return (j for j, _ in self.adjacency[i])

    def bond_between(self, i: int, j: int) -> Bond | None:
        return self._bond_index.get(frozenset((i, j)))

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def bond_sum(self, i: int) -> int:
        return sum(order.valence for _, order in self.adjacency[i])

    def hydrogens(self, i: int) -> int:
        """Total hydrogen count: stored value, or the valence-table default."""
        atom = self.atoms[i]
        if atom.explicit_h is not None:
            return atom.explicit_h
        return default_hydrogens(self, i)

    @property
    def has_coords(self) -> bool:
        return all(a.coord_2d is not None for a in self.atoms)

    def with_atoms(self, atoms: Iterable[Atom], **kw) -> "MolecularGraph":
        kw.setdefault("sanitized", self.sanitized)
        kw.setdefault("flags", self.flags)
        return MolecularGraph(tuple(atoms), self.bonds, **kw)

    def with_coords(self, coords, flags: Iterable[str] = ()) -> "MolecularGraph":
        atoms = [replace(a, coord_2d=(float(c[0]), float(c[1]))) for a, c in zip(self.atoms, coords)]
        return MolecularGraph(tuple(atoms), self.bonds, sanitized=self.sanitized,
                              flags=self.flags | frozenset(flags))

    def permuted(self, order: list[int]) -> "MolecularGraph":
        """Graph with atoms reordered so that new atom k is old atom ``order[k]``."""
        new_of_old = {old: new for new, old in enumerate(order)}
        atoms = [replace(self.atoms[old], index=new) for new, old in enumerate(order)]
        bonds = [Bond(new_of_old[b.a], new_of_old[b.b], b.order) for b in self.bonds]
        bonds.sort(key=lambda b: (min(b.a, b.b), max(b.a, b.b)))
        return MolecularGraph(tuple(atoms), tuple(bonds), sanitized=self.sanitized, flags=self.flags)

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        out = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp, stack = [], [start]
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in self.neighbors(i):
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            out.append(sorted(comp))
        return out


def default_hydrogens(graph: MolecularGraph, i: int) -> int:
    """Implicit hydrogen count from the valence table.

    Aromatic carbon/boron reserve one valence for the pi system; other
    aromatic atoms (n, o, s, p) never receive implicit hydrogens, matching
    the usual SMILES reading of lowercase atoms.
    """
    atom = graph.atoms[i]
    valences = allowed_valences(atom.element, atom.charge)
    if valences is None:
        return 0
    total = graph.bond_sum(i)
    if atom.is_aromatic:
        if atom.atomic_number - atom.charge in (5, 6):
            return max(0, valences[0] - 1 - total)
        return 0
    for v in valences:
        if v >= total:
            return v - total
    return 0

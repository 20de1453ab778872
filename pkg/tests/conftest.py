from __future__ import annotations

import os
from pathlib import Path

import networkx as nx
import pytest

from hybridmol.molgraph import MolecularGraph, parse_smiles, sanitize

DATA = Path(__file__).parent / "data"

# Tests never touch the network.
os.environ["HYBRIDMOL_OFFLINE"] = "1"


def load_smiles(name: str) -> list[str]:
    return [l.strip() for l in (DATA / name).read_text().splitlines() if l.strip()]


def to_nx(g: MolecularGraph) -> nx.Graph:
    """Labelled graph for the brute-force isomorphism oracle."""
    out = nx.Graph()
    for i, a in enumerate(g.atoms):
        out.add_node(i, label=(a.element, a.charge, g.hydrogens(i), a.is_aromatic))
    for b in g.bonds:
        out.add_edge(b.a, b.b, order=b.order.plain.value)
    return out


def isomorphic(a: MolecularGraph, b: MolecularGraph) -> bool:
    return nx.is_isomorphic(to_nx(a), to_nx(b),
                            node_match=lambda x, y: x["label"] == y["label"],
                            edge_match=lambda x, y: x["order"] == y["order"])


def mol(smiles: str) -> MolecularGraph:
    return sanitize(parse_smiles(smiles))


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    return load_smiles("corpus.smi")


@pytest.fixture(scope="session")
def small_set() -> list[str]:
    return load_smiles("small.smi")

"""Generate a small synthetic dataset and summarize it."""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from hybridmol.datagen import generate_batch, parse_reaction_smiles, write_dataset

SOURCES = [
    "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1.OB(O)c1ccccc1>Pd(OAc)2, PPh3, TBAB;Toluene, H2O>COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1",
    "CCO.CC(=O)O>H2SO4>CCOC(C)=O",
    "c1ccccc1>Br2, FeBr3>Brc1ccccc1",
]


def main(out: str | None = None) -> None:
    records = [parse_reaction_smiles(s) for s in SOURCES]
    reactions = generate_batch(records, 200, seed=0)
    molecules = generate_batch(["CC(=O)Oc1ccccc1C(=O)O", "CN(C)CCOc1ccc(Cl)cc1", "CCO"], 20, seed=0)
    print("reaction archetypes:", reactions.archetype_counts())
    first = next(s for s in molecules.samples if s is not None)
    print(f"molecule sample {first.provenance.source}: {first.counts()}")
    target = Path(out or tempfile.mkdtemp(prefix="hybridmol_"))
    write_dataset(reactions, target / "reactions")
    write_dataset(molecules, target / "molecules")
    print("written to", target)


if __name__ == "__main__":
    main(*sys.argv[1:2])

"""Regenerate the frozen molecule corpora (corpus.smi, small.smi).

Candidates are substituent x scaffold combinations plus a list of known
drug-like molecules. Filters are structural only (parses, sanitizes, 5-40
heavy atoms, depiction not flagged); round-trip outcome is never consulted.
"""

from __future__ import annotations

import random
from pathlib import Path

from hybridmol.molgraph import canonical_smiles, generate_2d_coords, parse_smiles, sanitize
from hybridmol.molgraph.layout import OVERLAP_FLAG

SUBSTITUENTS = [
    "C(=O)O", "C(=O)OC", "C(=O)OCC", "C(=O)N", "C(=O)NC", "C(=O)N(C)C", "C(=O)Cl", "C#N",
    "[N+](=O)[O-]", "N=O", "C=NO", "N=[N+]=[N-]", "N=Nc2ccccc2", "NN", "N", "NC", "N(C)C",
    "C=NC", "S(=O)(=O)O", "S(=O)(=O)OC", "S(=O)(=O)C", "S(=O)O", "SSC", "S", "SC", "S(=O)C",
    "C=O", "C(C)=O", "C(=O)CC", "O", "OO", "OOC", "OC", "OCC", "F", "Cl", "Br", "I", "C#C",
    "C=C", "c2ccncc2", "c2ncc[nH]2", "B(O)O", "B2OC(C)(C)C(C)(C)O2", "OC(=O)OC", "NC(=O)OC",
    "C(=N)N", "N=C=O", "N=C=S", "OC#N", "SC#N", "[N+]#[C-]", "C(=O)OC(=O)C", "C(OC)(OC)OC",
    "C(OC)OC", "C(O)OC", "C2CO2", "C(=S)O", "C(=O)S", "C(=S)S", "C(=O)SC", "C(=S)OC",
    "C[N+](C)(C)C", "C(=O)[O-]", "N2CCCC2=O", "N2C(=O)CCC2=O", "C2CCCOC2=O", "c2ccccc2",
    "CC(F)(F)F", "C(C)C", "CCO", "CCN", "CCCl",
]

SCAFFOLDS_1 = ["c1ccc({0})cc1", "CCC{0}", "CC(C){0}", "C1CCC({0})CC1", "c1ccc2cc({0})ccc2c1",
               "c1ccc2OCOc2c1{0}", "C=CC{0}", "c1ccc({0})s1"]
SCAFFOLDS_2 = ["{0}c1ccc({1})cc1", "{0}c1cccc({1})c1", "{0}c1ccccc1{1}", "{0}CCC{1}",
               "{0}CC(C){1}", "C1CC({0})CCC1{1}", "{0}c1ccc(-c3ccc({1})cc3)cc1"]

KNOWN = [
    "CC(=O)Oc1ccccc1C(=O)O", "CC(C)Cc1ccc(C(C)C(=O)O)cc1", "CC(=O)Nc1ccc(O)cc1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CN(C)CCOc1ccc(Cl)cc1", "COc1ccc2[nH]cc(CCN)c2c1",
    "OC(=O)CCc1ccccc1", "NCCc1ccc(O)c(O)c1", "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1", "OB(O)c1ccccc1",
    "COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1", "CC(C)(C)OC(=O)NCC(=O)O", "O=C1CCCN1",
    "Oc1ccc([N+](=O)[O-])cc1", "C[N+](C)(C)CC(=O)[O-]", "O=C(O)c1ccccc1O", "CCOC(=O)CC(=O)OCC",
    "O=C1OC(=O)c2ccccc21", "O=C1NC(=O)c2ccccc21", "CC(=O)CCC(=O)O", "OCC(O)CO", "NC(=O)c1cccnc1",
    "CSCCC(N)C(=O)O", "NC(CS)C(=O)O", "NC(Cc1ccccc1)C(=O)O", "NC(Cc1c[nH]cn1)C(=O)O",
    "CC(O)C(=O)O", "O=Cc1ccc(O)c(OC)c1", "CC(=O)c1ccc(N)cc1", "ClC(Cl)(Cl)c1ccccc1",
    "C#Cc1ccc(OC)cc1", "N#Cc1ccc(C#N)cc1", "CS(=O)(=O)c1ccc(C)cc1", "CS(C)=O", "CCSSCC",
    "O=S(=O)(O)c1ccc(N)cc1", "CC1(C)OCCO1", "CCOC(C)OCC", "C1CO1", "CC1CC(=O)O1",
    "O=C(Cl)c1ccccc1", "O=C=Nc1ccccc1", "S=C=Nc1ccccc1", "c1ccc(N=Nc2ccccc2)cc1",
    "NNc1ccccc1", "ON=C1CCCCC1", "O=Nc1ccc(N(C)C)cc1", "[N-]=[N+]=NCc1ccccc1",
    "CC(=O)SCC", "CC(=S)OCC", "CCOC(=O)OCC", "CCNC(=O)OCC", "CC(C)(C)OO", "CCOOCC",
    "c1ccc2ncccc2c1", "Cc1ccncc1", "c1ncc[nH]1", "OC1OCCCC1", "CC(=O)OC(C)=O",
    "CCOC(OCC)(OCC)C", "Brc1ccc(I)cc1", "FC(F)(F)c1ccc(Cl)cc1", "CCCCCCCCC=C", "C=CC(=O)OC",
    "COc1ccc(C=CC(=O)O)cc1", "CC(C)NCC(O)c1ccc(O)c(O)c1", "CN1CCN(C)CC1", "CCN(CC)CC",
    "O=C(O)c1cc(O)c(O)c(O)c1", "CC(=O)NC(Cc1ccccc1)C(=O)OC", "N#CCc1ccccc1",
    "O=C(OCc1ccccc1)NCC(=O)O", "CC(C)C(=O)Nc1ccccc1", "c1ccc(Oc2ccccc2)cc1",
    "OCc1ccc(CO)cc1", "O=C(O)CCCCC(=O)O", "NCCCCN", "CC[N+](C)(C)C", "CSc1ccccc1",
    "COC(=O)C(C)=CC", "CC(=NO)C", "CC(C)=NN", "C=CCOc1ccccc1", "O=CC=Cc1ccccc1",
]


def candidates(seed: int = 2024) -> list[str]:
    rng = random.Random(seed)
    out = list(KNOWN)
    for s in SCAFFOLDS_1:
        for r in SUBSTITUENTS:
            out.append(s.format(r))
    for _ in range(900):
        s = rng.choice(SCAFFOLDS_2)
        out.append(s.format(rng.choice(SUBSTITUENTS), rng.choice(SUBSTITUENTS)))
    return out


def accept(smiles: str, lo: int, hi: int) -> str | None:
    try:
        g = sanitize(parse_smiles(smiles))
    except Exception:
        return None
    if not lo <= len(g.atoms) <= hi:
        return None
    if "." in smiles or OVERLAP_FLAG in generate_2d_coords(g).flags:
        return None
    return canonical_smiles(g)


def build(path: Path, lo: int, hi: int, limit: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    pool = candidates()
    head, tail = pool[: len(KNOWN)], pool[len(KNOWN):]
    rng.shuffle(tail)
    seen, keep = set(), []
    for s in head + tail:
        c = accept(s, lo, hi)
        if c and c not in seen:
            seen.add(c)
            keep.append(s)
        if len(keep) == limit:
            break
    path.write_text("".join(f"{s}\n" for s in keep), encoding="utf-8")
    return keep


if __name__ == "__main__":
    here = Path(__file__).parent
    print(len(build(here / "corpus.smi", 5, 40, 400, 1)))
    print(len(build(here / "small.smi", 1, 12, 50, 2)))

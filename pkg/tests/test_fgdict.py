from __future__ import annotations

import random

import pytest

from hybridmol.fgdict import (DictionaryError, decompose, default_dictionary, load_priority_list,
                              match_template)
from hybridmol.fgdict.match import core_atoms

from conftest import mol

D = default_dictionary()


def test_shipped_list_ranks():
    names = list(D)
    assert len(names) == 66
    assert D["Quaternary Ammonium"].priority_rank == 1
    assert D["Carboxylic Acid"].priority_rank == 16
    assert D["Halo"].priority_rank == 66
    assert len({t.priority_rank for t in D.values()}) == 66


def test_template_invariants():
    for t in D.values():
        assert t.attachment_candidates
        assert len(t.direction_vectors) == len(t.attachment_candidates)
        norms = (t.direction_vectors ** 2).sum(axis=1) ** 0.5
        assert abs(norms - 1).max() < 1e-9, t.name


def test_empty_document():
    assert dict(load_priority_list("")) == {}
    g = mol("CCO")
    dec = decompose(g, {})
    assert dec.group_instances == () and dec.residual_atoms == frozenset(range(3))


def test_duplicate_name_rejected():
    with pytest.raises(DictionaryError):
        load_priority_list("Ester\nEster\n")


def test_unknown_name_rejected():
    with pytest.raises(DictionaryError, match="Unobtainium"):
        load_priority_list("Unobtainium\n")


def test_benzene_aryl_embeddings_collapse():
    g = mol("c1ccccc1")
    maps = match_template(g, D["Aryl"], frozenset())
    assert len({frozenset(core_atoms(D["Aryl"], m)) for m in maps}) == 1


def test_acetic_acid_carboxyl_match():
    g = mol("CC(=O)O")
    maps = match_template(g, D["Carboxylic Acid"], frozenset())
    assert {frozenset(core_atoms(D["Carboxylic Acid"], m)) for m in maps} == {frozenset({1, 2, 3})}
    assert match_template(g, D["Carboxylic Acid"], frozenset({1})) == []


def test_decompose_acetic_acid():
    dec = decompose(mol("CC(=O)O"), D)
    assert [(g.name, g.atoms) for g in dec.group_instances] == [("Carboxylic Acid", frozenset({1, 2, 3}))]
    assert dec.residual_atoms == frozenset({0})


def test_decompose_methane():
    dec = decompose(mol("C"), D)
    assert dec.group_instances == () and dec.residual_atoms == frozenset({0})


def test_decompose_biaryl_ester_golden():
    dec = decompose(mol("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1"), D)
    names = sorted(g.name for g in dec.group_instances)
    assert names == ["Aryl", "Aryl", "Aryl Halide", "Ester"]
    assert dec.residual_atoms == frozenset({0})  # methyl carbon
    bromo = next(g for g in dec.group_instances if g.name == "Aryl Halide")
    assert bromo.variant == ("Br",)


def test_priority_order_decides_overlap():
    g = mol("CC(=O)O")
    acid_first = decompose(g, load_priority_list("Carboxylic Acid\nCarbonyl\n"))
    assert [x.name for x in acid_first.group_instances] == ["Carboxylic Acid"]
    carbonyl_first = decompose(g, load_priority_list("Carbonyl\nCarboxylic Acid\n"))
    assert [(x.name, x.atoms) for x in carbonyl_first.group_instances] == [("Carbonyl", frozenset({1, 2}))]


def test_partition_and_closed_set(corpus):
    for s in corpus:
        g = mol(s)
        dec = decompose(g, D)
        dec.check_partition(len(g.atoms))
        assert all(x.name in D for x in dec.group_instances)


def test_decompose_permutation_invariant(corpus):
    rng = random.Random(11)
    for s in corpus[:60]:
        g = mol(s)
        order = list(range(len(g.atoms)))
        rng.shuffle(order)
        a = sorted((x.name, tuple(sorted(x.atoms))) for x in decompose(g, D).group_instances)
        p = decompose(g.permuted(order), D)
        b = sorted((x.name, tuple(sorted(order[i] for i in x.atoms))) for x in p.group_instances)
        assert a == b, s

from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from hybridmol.activation import (MAX_SYNONYMS, OFFLINE_ENV, DiskCache, EntityNames, Resolver,
                                  build_prompt, build_reaction_context, canonical_key, names_from_raw,
                                  resolve_entities, select_synonyms)
from hybridmol.reaction import ReactionRecord

from conftest import DATA

REACTANT = "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1"
BORONIC = "OB(O)c1ccccc1"
PRODUCT = "COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1"
SUZUKI = ReactionRecord(1, (REACTANT, BORONIC), (PRODUCT,), ("Pd(OAc)2", "PPh3", "TBAB"), ("Toluene", "H2O"))

RAW_ETHANOL = {"PropertyTable": {"Properties": [{"CID": 702, "IUPACName": "ethanol"}]},
               "InformationList": {"Information": [{"CID": 702, "Synonym": ["ethanol", "Ethyl alcohol",
                                                                            "ETHANOL", "alcohol", "grain alcohol"]}]}}


class FakeClient:
    def __init__(self, raw=None, fail=False):
        self.raw, self.fail, self.calls = raw, fail, []

    def fetch(self, smiles):
        self.calls.append(smiles)
        if self.fail:
            raise ConnectionError("offline")
        return self.raw


def test_fixture_phenylboronic_acid():
    n = resolve_entities(BORONIC)
    assert n.iupac == "phenylboronic acid" and "Phenylboronic acid" in n.common and n.source == "fixture"


def test_fixture_reactant_iupac():
    assert resolve_entities(REACTANT).iupac == "methyl 4-(4-bromophenyl)benzoate"


def test_offline_unknown_is_unresolved():
    n = resolve_entities("CCCCCCCCCCCCCCCCCCCCCl")
    assert n == EntityNames() and n.source == "unresolved" and not n.resolved


def test_unparseable_smiles_is_unresolved():
    assert resolve_entities("C1CC").source == "unresolved"


def test_entity_names_invariants():
    with pytest.raises(ValueError):
        EntityNames("x", ("Aspirin", "ASPIRIN"))
    with pytest.raises(ValueError):
        EntityNames(source="web")


def test_synonym_selection():
    sel = select_synonyms(["ethanol", "Ethyl alcohol", "ETHANOL", "alcohol", "grain alcohol"], "ethanol")
    assert sel == ("Ethyl alcohol", "alcohol", "grain alcohol") and len(sel) == MAX_SYNONYMS
    assert select_synonyms(["Ethanol"], "ethanol") == ("Ethanol",)


def test_first_record_taken():
    raw = {"PropertyTable": {"Properties": [{"IUPACName": "a"}, {"IUPACName": "b"}]}}
    assert names_from_raw(raw, "live").iupac == "a"


def test_prompt_published_form():
    n = resolve_entities(BORONIC)
    assert build_prompt(n, BORONIC, "Analyze...") == \
        "Image shows [Phenylboronic acid, phenylboronic acid] (SMILES: [OB(O)c1ccccc1]). Analyze..."


def test_prompt_unresolved_degrades():
    p = build_prompt(EntityNames(), "CCO")
    assert "(SMILES: [CCO])" in p and "[]" not in p and "[, " not in p


def test_prompt_requires_smiles():
    with pytest.raises(ValueError):
        build_prompt(EntityNames(), "")


text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=20)


@given(text, st.lists(text, max_size=4, unique_by=str.casefold), st.text(min_size=1, max_size=30), text)
def test_prompt_template_law(iupac, common, smiles, suffix):
    p = build_prompt(EntityNames(iupac, tuple(common), "fixture"), smiles, suffix)
    marker = "(SMILES: ["
    assert p.count(marker) == 1 + sum(s.count(marker) for s in [iupac, *common, smiles, suffix])
    assert p.startswith("Image shows ")
    assert p == build_prompt(EntityNames(iupac, tuple(common), "fixture"), smiles, suffix)


def test_reaction_context_matches_published_block():
    r = Resolver()
    names = {s: r.resolve(s) for s in (*SUZUKI.reactants, *SUZUKI.products)}
    assert build_reaction_context(SUZUKI, names) + "\n" == (DATA / "suzuki_context_named.txt").read_text()
    assert build_reaction_context(SUZUKI) + "\n" == (DATA / "suzuki_context_plain.txt").read_text()


def test_reaction_context_empty_values_kept():
    rec = ReactionRecord(1, ("CCO",), ("CC=O",))
    out = build_reaction_context(rec, {})
    assert out.endswith("Reagents:  ; solvents: ")
    assert "Product1: CC=O, Synonyms: , IUPAC Name: " in out


def test_multiline_separator():
    assert build_reaction_context(SUZUKI, separator="\n").count("\n") == 3


def test_live_mode_populates_cache(tmp_path, monkeypatch):
    monkeypatch.delenv(OFFLINE_ENV)
    client = FakeClient(RAW_ETHANOL)
    r = Resolver("live", tmp_path, fixtures={}, client=client)
    n = r.resolve("OCC")
    assert n.source == "live" and n.iupac == "ethanol" and client.calls == [canonical_key("CCO")]
    entry = json.loads(DiskCache(tmp_path).path(canonical_key("CCO")).read_text())
    assert set(entry) == {"canonical", "raw", "names", "timestamp"}
    # Equal canonical forms share one lookup.
    assert r.resolve("C(C)O") == n and r.lookups == 1
    # A fresh resolver reads the cache without the network.
    again = Resolver("live", tmp_path, fixtures={}, client=FakeClient(fail=True)).resolve("CCO")
    assert again.source == "cache" and again.iupac == "ethanol"


def test_live_failure_falls_back(tmp_path, monkeypatch):
    monkeypatch.delenv(OFFLINE_ENV)
    r = Resolver("live", tmp_path, client=FakeClient(fail=True))
    assert r.resolve(BORONIC).source == "fixture"
    assert r.resolve("CCCCCCCCCCCCCCCCN").source == "unresolved"


def test_env_forces_offline(tmp_path, monkeypatch):
    monkeypatch.setenv(OFFLINE_ENV, "1")
    client = FakeClient(RAW_ETHANOL)
    r = Resolver("live", tmp_path, fixtures={}, client=client)
    assert r.mode == "offline" and r.resolve("CCO").source == "unresolved" and client.calls == []


def test_bad_mode():
    with pytest.raises(ValueError):
        Resolver("sometimes")

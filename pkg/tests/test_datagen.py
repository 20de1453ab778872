from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings, strategies as st

from hybridmol.datagen import (ARCHETYPES, CAT, CATEGORIES, DatasetSample, GenerationError, MixError,
                               OVERLAP_TOLERANCE, Line, Polyline, Text, coco_document, gen_molecule_sample,
                               gen_reaction_layout, generate_batch, normalize_annotations, parse_mix,
                               parse_reaction_smiles, primitive_extent, render_svg, write_dataset)
from hybridmol.reaction import ReactionRecord

SVG = "{http://www.w3.org/2000/svg}"
SUZUKI = ReactionRecord(1, ("COC(=O)c1ccc(-c2ccc(Br)cc2)cc1", "OB(O)c1ccccc1"),
                        ("COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1",),
                        ("Pd(OAc)2", "PPh3", "TBAB"), ("Toluene", "H2O"))
MINIMAL = ReactionRecord(1, ("CCO",), ("CC=O",))


def test_category_table_matches_published():
    assert CATEGORIES == ((0, "Arrow"), (1, "Conditions"), (2, "FunctionalGroup"), (3, "Plus"),
                          (4, "Products"), (5, "Reactants"), (6, "Bond"), (7, "Anchor"))


def test_benzene_single_group():
    assert gen_molecule_sample("c1ccccc1", 0).counts() == {"FunctionalGroup": 1}


def test_ethanol_counts():
    assert gen_molecule_sample("CCO", 0).counts() == {"FunctionalGroup": 1, "Bond": 1, "Anchor": 1}


@pytest.mark.parametrize("seed", [0, 7, 123456])
def test_molecule_determinism(seed):
    a, b = gen_molecule_sample("CC(=O)Nc1ccc(O)cc1", seed), gen_molecule_sample("CC(=O)Nc1ccc(O)cc1", seed)
    assert a == b and render_svg(a) == render_svg(b)


def test_anchor_annotations_shape():
    s = gen_molecule_sample("CCc1ccc(CO)cc1", 3)
    anchors = [a for a in s.annotations if a.category_id == CAT["Anchor"]]
    assert anchors
    for a in anchors:
        x, y, v = a.keypoints
        assert v == 2 and a.bbox[2] == 0 and a.bbox[3] == 0 and (a.bbox[0], a.bbox[1]) == (x, y)
        assert s.annotations[a.parent].box.contains((x, y), 1.0)


def _inflate(b, d=1.0):
    return type(b)(b.x1 - d, b.y1 - d, b.x2 + d, b.y2 + d)


@pytest.mark.parametrize("smiles", ["CCO", "CC(=O)Oc1ccccc1C(=O)O", "CN(C)CCOc1ccc(Cl)cc1", "O=C1OC(=O)c2ccccc21"])
def test_bond_boxes_touch_group(smiles):
    s = gen_molecule_sample(smiles, 1)
    nodes = [a.box for a in s.annotations if a.category_id == CAT["FunctionalGroup"]]
    for a in s.annotations:
        if a.category_id == CAT["Bond"]:
            assert any(a.box.intersection(_inflate(n)) > 0 for n in nodes)


def test_ethanol_hydroxyl_label_inside_group_box():
    s = gen_molecule_sample("CCO", 5)
    group = next(a for a in s.annotations if a.category_id == CAT["FunctionalGroup"])
    root = ET.fromstring(render_svg(s))
    labels = [t for t in root.iter(f"{SVG}text") if set(t.text) <= {"O", "H"} and "O" in t.text]
    assert labels
    for t in labels:
        assert group.box.contains((float(t.get("x")), float(t.get("y"))))


def test_svg_canvas_and_blank_sample():
    svg = render_svg(DatasetSample(120, 80))
    root = ET.fromstring(svg)
    assert (root.get("width"), root.get("height")) == ("120", "80")
    assert [c.tag for c in root] == [f"{SVG}rect"]


@pytest.mark.parametrize("archetype", ARCHETYPES)
def test_suzuki_role_multiset(archetype):
    s = gen_reaction_layout(SUZUKI, archetype, 11)
    assert s.counts() == {"Reactants": 2, "Plus": 1, "Arrow": 1, "Conditions": 1, "Products": 1}


@pytest.mark.parametrize("archetype", ARCHETYPES)
def test_minimal_layout(archetype):
    assert gen_reaction_layout(MINIMAL, archetype, 2).counts() == {"Reactants": 1, "Arrow": 1, "Products": 1}


def test_unknown_archetype_and_bad_smiles():
    with pytest.raises((GenerationError, ValueError)):
        gen_reaction_layout(MINIMAL, "Spiral", 0)
    with pytest.raises(Exception):
        gen_reaction_layout(ReactionRecord(1, ("C1CC",), ("CC",)), "Linear", 0)


def test_too_many_components_rejected():
    big = ReactionRecord(1, tuple(["c1ccc2ccccc2c1"] * 400), ("CC",))
    with pytest.raises(GenerationError):
        gen_reaction_layout(big, "Linear", 0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ARCHETYPES), st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 2),
       st.booleans())
def test_layout_geometry(archetype, seed, n_react, n_prod, conditions):
    pool = ["CCO", "c1ccccc1", "CC(=O)O", "OB(O)c1ccccc1", "CN"]
    rec = ReactionRecord(1, tuple(pool[:n_react]), tuple(pool[-n_prod:]),
                         ("NaOH",) if conditions else (), ())
    s = gen_reaction_layout(rec, archetype, seed)
    boxes = [a.box for a in s.annotations]
    for i, a in enumerate(boxes):
        assert 0 <= a.x1 and 0 <= a.y1 and a.x2 <= s.width and a.y2 <= s.height
        for b in boxes[i + 1:]:
            ox = min(a.x2, b.x2) - max(a.x1, b.x1)
            oy = min(a.y2, b.y2) - max(a.y1, b.y1)
            assert min(ox, oy) <= OVERLAP_TOLERANCE
    # Every annotated box encloses the primitives it covers.
    for a in s.annotations:
        for k in a.primitives:
            e = primitive_extent(s.primitives[k])
            assert a.box.contains((e.x1, e.y1), 1e-6) and a.box.contains((e.x2, e.y2), 1e-6)


def test_arrow_polyline_inside_arrow_box():
    s = gen_reaction_layout(SUZUKI, "TreeGraph", 4)
    arrow = next(a for a in s.annotations if a.category_id == CAT["Arrow"])
    drawn = [s.primitives[k] for k in arrow.primitives]
    assert any(isinstance(p, (Polyline, Line)) for p in drawn)
    root = list(ET.fromstring(render_svg(s)))[1:]  # skip background rect
    for k in arrow.primitives:
        node = root[k]
        if node.tag.endswith(("polyline", "polygon")):
            for pair in node.get("points").split():
                x, y = map(float, pair.split(","))
                assert arrow.box.contains((x, y), 0.01)


def test_text_extent_model():
    e = Text((50, 20), "OH", 10, "Arial").extent()
    assert (e.width, e.height) == pytest.approx((12.0, 10.0))
    assert primitive_extent(Line((0, 0), (4, 3), 1.0)).x2 >= 4


def test_normalized_annotations_in_frame():
    s = gen_reaction_layout(SUZUKI, "Linear", 0)
    for a in normalize_annotations(s):
        x, y, w, h = a["bbox"]
        assert 0 <= x and 0 <= y and x + w <= 1000 + 1e-6 and y + h <= 1000 + 1e-6


@pytest.mark.parametrize("text", ["0.5,0.5", "0.7,0.2,0.2", "-0.1,0.6,0.5", "a,b,c"])
def test_mix_errors(text):
    with pytest.raises((MixError, ValueError)):
        parse_mix(text)


def test_parse_reaction_smiles():
    rec = parse_reaction_smiles("CCO.CC>NaOH;THF>CC=O")
    assert rec.reactants == ("CCO", "CC") and rec.products == ("CC=O",)
    assert rec.reagents == ("NaOH",) and rec.solvents == ("THF",)
    with pytest.raises(GenerationError):
        parse_reaction_smiles("CCO>CC")


def test_batch_mix_and_determinism(tmp_path):
    a = generate_batch([SUZUKI, MINIMAL], 400, seed=9)
    b = generate_batch([SUZUKI, MINIMAL], 400, seed=9, jobs=4)
    assert a.manifest == b.manifest
    counts = a.archetype_counts()
    assert set(counts) <= set(ARCHETYPES) and counts["Linear"] > counts["MultiLine"]
    write_dataset(a, tmp_path / "x")
    write_dataset(b, tmp_path / "y")
    for name in ("annotations.json", "manifest.json", "images/000017.svg"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    doc = json.loads((tmp_path / "x" / "annotations.json").read_text())
    assert list(doc) == ["images", "categories", "annotations", "relations"]


def test_molecule_sources_and_skips():
    ds = generate_batch(["CCO", "c1ccccc1"], 20, seed=1)
    assert set(ds.archetype_counts()) == {"Molecule"}
    doc = coco_document(ds)
    assert len(doc["images"]) == sum(m.status == "ok" for m in ds.manifest)

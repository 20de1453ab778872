from __future__ import annotations

import json
from importlib import resources

import pytest
from hypothesis import given, settings, strategies as st

from hybridmol.anchor import BBox
from hybridmol.reaction import (FAILURE_PLACEHOLDER, RECOGNITION_FAILURE, DiagramElement, LayoutError,
                                assemble_reaction, crop, elements_from_coco, elements_from_records,
                                normalize_rect, parse_layout, reading_order, split_conditions)

REACTANT = "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1"
BORONIC = "OB(O)c1ccccc1"
PRODUCT = "COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1"


def published_coco():
    return json.loads(resources.files("hybridmol.data").joinpath("published_coco_example.json").read_text())


def el(rid, role, x1, y1, x2, y2, key="", index=0):
    return DiagramElement(rid, role, BBox(x1, y1, x2, y2), key, index)


def test_published_image_0_grouping():
    groups = parse_layout(elements_from_coco(published_coco(), 0))
    assert len(groups) == 1
    g = groups[0]
    assert g.role_counts() == {"Reactant": 2, "Product": 2, "Condition": 0, "Arrow": 1, "Plus": 1}
    assert [round(e.box.x1, 1) for e in g.reactants] == [9.8, 154.0]
    assert [e.box.x1 < f.box.x1 for e, f in zip(g.products, g.products[1:])] == [True]


def test_empty_layout():
    assert parse_layout([]) == []


def test_two_step_chain_shares_intermediate():
    b = (300, 100, 400, 200)
    elements = [el(1, "Reactant", 0, 100, 100, 200, "A"), el(1, "Arrow", 150, 140, 250, 160, "r1"),
                el(1, "Product", *b, "B"), el(2, "Reactant", *b, "B"),
                el(2, "Arrow", 450, 140, 550, 160, "r2"), el(2, "Product", 600, 100, 700, 200, "C")]
    g1, g2 = parse_layout(elements)
    assert [e.key for e in g1.products] == ["B"] and [e.key for e in g2.reactants] == ["B"]
    recs = assemble_reaction([g1, g2], {"A": "CC", "B": "CCO", "C": "CC=O"})
    assert recs[0].products == recs[1].reactants == ("CCO",)


def test_arrow_without_reactants_warns():
    (g,) = parse_layout([el(1, "Arrow", 0, 0, 10, 10), el(1, "Product", 20, 0, 30, 10)])
    assert g.warnings


def test_invalid_roles_and_ids():
    with pytest.raises(LayoutError):
        el(1, "Catalyst", 0, 0, 1, 1)
    with pytest.raises(LayoutError):
        el(0, "Arrow", 0, 0, 1, 1)
    with pytest.raises(LayoutError):
        elements_from_records([{"reaction_id": 1, "role": "Arrow"}])


def test_reading_order_rows_then_x():
    top_right = el(1, "Reactant", 500, 0, 600, 100, "tr", 0)
    bottom_left = el(1, "Reactant", 0, 300, 100, 400, "bl", 1)
    top_left = el(1, "Reactant", 0, 10, 100, 110, "tl", 2)
    assert [e.key for e in reading_order([top_right, bottom_left, top_left])] == ["tl", "tr", "bl"]


def test_reading_order_ties_by_input_index():
    a, b = el(1, "Plus", 0, 0, 10, 10, "a", 1), el(1, "Plus", 0, 0, 10, 10, "b", 0)
    assert [e.key for e in reading_order([a, b])] == ["b", "a"]


@pytest.mark.parametrize("box, canvas, expected", [
    ((0, 0, 1000, 1000), (438, 149), (0, 0, 438, 149)),
    ((500, 500, 1000, 1000), (200, 100), (100, 50, 200, 100)),
])
def test_crop_examples(box, canvas, expected):
    assert crop(BBox(*box), canvas) == expected


def test_crop_tiny_box_nonempty():
    x1, y1, x2, y2 = crop(BBox(0, 0, 1, 1), (10, 10))
    assert x2 - x1 >= 1 and y2 - y1 >= 1


def test_crop_rejects_bad_canvas():
    with pytest.raises(ValueError):
        crop(BBox(0, 0, 1, 1), (0, 10))


@st.composite
def pixel_rects(draw):
    w, h = draw(st.integers(1, 4000)), draw(st.integers(1, 4000))
    x1 = draw(st.floats(0, w - 0.01)); x2 = draw(st.floats(x1 + 0.01, w))
    y1 = draw(st.floats(0, h - 0.01)); y2 = draw(st.floats(y1 + 0.01, h))
    return (x1, y1, x2, y2), (w, h)


@settings(max_examples=500, deadline=None)
@given(pixel_rects())
def test_crop_normalize_within_one_pixel(case):
    rect, canvas = case
    out = crop(normalize_rect(rect, canvas), canvas)
    assert all(abs(a - b) <= 1 for a, b in zip(out, rect))
    # Outward rounding: the crop contains the original rectangle.
    assert out[0] <= rect[0] + 1e-6 and out[1] <= rect[1] + 1e-6
    assert out[2] >= rect[2] - 1e-6 and out[3] >= rect[3] - 1e-6


def test_condition_split():
    reagents, solvents = split_conditions(["Pd(OAc)2, PPh3, TBAB / Toluene, H2O"])
    assert reagents == ("Pd(OAc)2", "PPh3", "TBAB") and solvents == ("Toluene", "H2O")


def test_condition_split_custom_lexicon():
    assert split_conditions(["NaH; DMF"], lexicon=["NaH"]) == (("DMF",), ("NaH",))


def suzuki_layout():
    return [el(1, "Reactant", 10, 100, 200, 300, "r1", 0), el(1, "Plus", 210, 190, 230, 210, "p", 1),
            el(1, "Reactant", 240, 120, 340, 280, "r2", 2), el(1, "Condition", 360, 120, 520, 180, "c", 3),
            el(1, "Arrow", 360, 190, 520, 210, "a", 4), el(1, "Product", 540, 100, 990, 300, "P", 5)]


def test_suzuki_assembly():
    groups = parse_layout(suzuki_layout())
    (rec,) = assemble_reaction(groups, {"r1": REACTANT, "r2": BORONIC, "P": PRODUCT},
                               {"c": "Pd(OAc)2, PPh3, TBAB / Toluene, H2O"})
    assert rec.reactants == (REACTANT, BORONIC) and rec.products == (PRODUCT,)
    assert rec.reagents == ("Pd(OAc)2", "PPh3", "TBAB") and rec.solvents == ("Toluene", "H2O")
    assert rec.complete and not rec.failures


def test_no_conditions_gives_empty_lists():
    elements = [e for e in suzuki_layout() if e.role != "Condition"]
    (rec,) = assemble_reaction(parse_layout(elements), {"r1": REACTANT, "r2": BORONIC, "P": PRODUCT})
    assert rec.reagents == () and rec.solvents == ()


def test_recognition_failure_placeholder():
    (rec,) = assemble_reaction(parse_layout(suzuki_layout()), {"r1": REACTANT, "r2": RECOGNITION_FAILURE})
    assert rec.reactants == (REACTANT, FAILURE_PLACEHOLDER) and rec.products == (FAILURE_PLACEHOLDER,)
    assert rec.failures == ("r2", "P")


def test_structures_keyed_by_box():
    elements = suzuki_layout()
    table = {e.box: s for e, s in zip([elements[0], elements[2], elements[5]], [REACTANT, BORONIC, PRODUCT])}
    (rec,) = assemble_reaction(parse_layout(elements), table)
    assert rec.reactants == (REACTANT, BORONIC)


def test_multi_arrow_coco_one_reaction_per_arrow():
    coco = {"images": [{"id": 9, "width": 600, "height": 100}], "annotations": [
        {"id": 0, "image_id": 9, "category_id": 5, "bbox": [0, 30, 80, 40]},
        {"id": 1, "image_id": 9, "category_id": 0, "bbox": [100, 45, 80, 10]},
        {"id": 2, "image_id": 9, "category_id": 4, "bbox": [200, 30, 80, 40]},
        {"id": 3, "image_id": 9, "category_id": 0, "bbox": [300, 45, 80, 10]},
        {"id": 4, "image_id": 9, "category_id": 4, "bbox": [420, 30, 80, 40]},
    ]}
    groups = parse_layout(elements_from_coco(coco, 9))
    assert [g.reaction_id for g in groups] == [1, 2]
    assert all(len(g.arrows) == 1 for g in groups)


def test_partition_with_sharing():
    elements = elements_from_coco(published_coco(), 0)
    groups = parse_layout(elements)
    seen = [e for g in groups for role in (g.reactants, g.products, g.conditions, g.arrows, g.pluses) for e in role]
    assert sorted(e.index for e in seen) == sorted(e.index for e in elements)

"""Parse a published layout, assemble a reaction record, and build name-first prompts offline."""

from __future__ import annotations

import json
from importlib import resources

from hybridmol.activation import Resolver, build_prompt, build_reaction_context
from hybridmol.reaction import assemble_reaction, crop, elements_from_coco, normalize_rect, parse_layout

# Element 4 is a stand-in structure; the annotation file carries boxes only.
SMILES = {"0": "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1", "1": "OB(O)c1ccccc1",
          "2": "COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1", "4": "c1ccccc1"}


def main() -> None:
    coco = json.loads(resources.files("hybridmol.data").joinpath("published_coco_example.json").read_text())
    image = next(i for i in coco["images"] if i["id"] == 0)
    canvas = (image["width"], image["height"])
    (group,) = parse_layout(elements_from_coco(coco, 0))
    print("roles:", {k: v for k, v in group.role_counts().items() if v})
    for e in (*group.reactants, *group.products):
        x1, y1, x2, y2 = e.box.as_list()
        print(f"  {e.role:8s} id {e.element_id}  crop {crop(normalize_rect((x1, y1, x2, y2), canvas), canvas)}")

    # Structures would come from the recognizer; here they are given per element id.
    (record,) = assemble_reaction([group], SMILES, {})
    print("reactants:", record.reactants, "\nproducts: ", record.products)

    resolver = Resolver("offline")
    names = {s: resolver.resolve(s) for s in (*record.reactants, *record.products)}
    for s, n in names.items():
        print(f"  [{n.source:10s}] {build_prompt(n, s, 'Describe the compound.')}")
    print("context:", build_reaction_context(record, names))


if __name__ == "__main__":
    main()

from __future__ import annotations

import json

import pytest

from hybridmol.cli import EXIT_ITEM_FAILURE, EXIT_OK, EXIT_STARTUP, main
from hybridmol.molgraph import canonical_smiles, parse_smiles, sanitize

from conftest import DATA

TEN = ["CCO", "c1ccccc1", "CC(=O)O", "CCN", "CC(=O)Oc1ccccc1C(=O)O", "C1CC", "CCOC(C)=O", "OCCO", "CC#N", "CS(C)=O"]


def canon(s):
    return canonical_smiles(sanitize(parse_smiles(s)))


def write(path, lines):
    path.write_text("".join(f"{l}\n" for l in lines))
    return str(path)


def test_decompose_one_molecule(tmp_path):
    src = write(tmp_path / "one.smi", ["CCO"])
    assert main(["decompose", src, "--out", str(tmp_path / "o")]) == EXIT_OK
    assert len(list((tmp_path / "o" / "hybrid").glob("*.json"))) == 1


def test_decompose_one_malformed_of_ten(tmp_path):
    src = write(tmp_path / "ten.smi", TEN)
    assert main(["decompose", src, "--out", str(tmp_path / "o")]) == EXIT_ITEM_FAILURE
    assert len(list((tmp_path / "o" / "hybrid").glob("*.json"))) == 9
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["counts"] == {"total": 10, "ok": 9, "failed": 1}
    assert [i["input"] for i in man["items"] if i["status"] == "failed"] == ["ten.smi:6"]


def test_decompose_deterministic(tmp_path):
    src = write(tmp_path / "ten.smi", TEN)
    main(["decompose", src, "--out", str(tmp_path / "a"), "--jobs", "3"])
    main(["decompose", src, "--out", str(tmp_path / "b")])
    for f in sorted((tmp_path / "a" / "hybrid").glob("*.json")):
        assert f.read_bytes() == (tmp_path / "b" / "hybrid" / f.name).read_bytes()


def test_bad_priority_list_is_startup_error(tmp_path):
    src = write(tmp_path / "one.smi", ["CCO"])
    bad = write(tmp_path / "bad.txt", ["Not A Group"])
    assert main(["decompose", src, "--priority-list", bad, "--out", str(tmp_path / "o")]) == EXIT_STARTUP
    assert main(["decompose", str(tmp_path / "missing.smi"), "--out", str(tmp_path / "o")]) == EXIT_STARTUP


def test_reconstruct_round_trip(tmp_path, capsys):
    src = write(tmp_path / "ten.smi", TEN)
    main(["decompose", src, "--out", str(tmp_path / "d")])
    capsys.readouterr()
    assert main(["reconstruct", str(tmp_path / "d" / "hybrid"), "--out", str(tmp_path / "r")]) == EXIT_OK
    got = (tmp_path / "r" / "smiles.txt").read_text().split()
    assert got == [canon(s) for s in TEN if s != "C1CC"]


def test_reconstruct_ethanol_golden(tmp_path, capsys):
    assert main(["reconstruct", str(DATA / "ethanol_hybrid.json"), "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == canon("CCO")


def test_reconstruct_empty_set(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["reconstruct", str(empty), "--out", str(tmp_path / "r")]) == EXIT_OK
    assert (tmp_path / "r" / "smiles.txt").read_text() == ""


def test_reconstruct_invalid_valence(tmp_path):
    doc = {"supernodes": [], "atoms": [{"id": f"A_{i}", "symbol": "C", "bbox": [10 * i, 0, 10 * i + 8, 8]}
                                       for i in range(1, 7)],
           "bonds": [{"source": "A_1", "target": f"A_{i}", "type": "SINGLE"} for i in range(2, 7)]}
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert main(["reconstruct", str(tmp_path / "bad.json"), "--out", str(tmp_path / "r")]) == EXIT_ITEM_FAILURE
    report = (tmp_path / "r" / "report.tsv").read_text()
    assert "sanitize:" in report and "valence" in report


def test_reconstruct_closed_set_violation(tmp_path):
    doc = {"supernodes": [{"id": "FG_1", "label": "Unobtainium", "bbox": [0, 0, 5, 5]}], "atoms": [], "bonds": []}
    (tmp_path / "x.json").write_text(json.dumps(doc))
    assert main(["reconstruct", str(tmp_path / "x.json"), "--out", str(tmp_path / "r")]) == EXIT_ITEM_FAILURE


@pytest.mark.parametrize("n_match, expected", [(10, "100.0"), (0, "0.0")])
def test_eval_extremes(tmp_path, capsys, n_match, expected):
    gt = ["C" * (i + 1) for i in range(10)]
    pred = gt[:n_match] + ["N" * (i + 1) for i in range(n_match, 10)]
    assert main(["eval", write(tmp_path / "p", pred), write(tmp_path / "g", gt), "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == expected


def test_eval_92_of_100(tmp_path, capsys):
    gt = ["C" * (i + 1) for i in range(100)]
    pred = gt[:92] + ["O" for _ in range(8)]
    main(["eval", write(tmp_path / "p", pred), write(tmp_path / "g", gt), "--out", str(tmp_path)])
    assert capsys.readouterr().out.strip() == "92.0"


def test_eval_length_mismatch(tmp_path):
    assert main(["eval", write(tmp_path / "p", ["C"]), write(tmp_path / "g", ["C", "N"]),
                 "--out", str(tmp_path)]) == EXIT_STARTUP


def test_generate_counts_and_determinism(tmp_path):
    src = write(tmp_path / "rx.txt", ["CCO.CC(=O)O>H2SO4>CCOC(C)=O", "c1ccccc1Br.OB(O)c1ccccc1>Pd;THF>c1ccc(-c2ccccc2)cc1"])
    for name in ("a", "b"):
        assert main(["generate", src, "--count", "50", "--seed", "3", "--out", str(tmp_path / name)]) == EXIT_OK
    for f in ("annotations.json", "manifest.json", "images/000010.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert sum(man["counts"].values()) == 50


def test_generate_zero(tmp_path):
    src = write(tmp_path / "rx.txt", ["CCO>>CC=O"])
    assert main(["generate", src, "--count", "0", "--out", str(tmp_path / "o")]) == EXIT_OK
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["counts"] == {} and man["samples"] == []


def test_generate_bad_mix(tmp_path):
    src = write(tmp_path / "rx.txt", ["CCO>>CC=O"])
    assert main(["generate", src, "--mix", "0.5,0.5,0.5", "--out", str(tmp_path / "o")]) == EXIT_STARTUP


def test_resolve_offline_table(tmp_path):
    src = write(tmp_path / "s.smi", ["OB(O)c1ccccc1", "COC(=O)c1ccc(-c2ccc(Br)cc2)cc1", "OB(O)c1ccccc1", "CCCCCCCCCCCCCCCCCN"])
    assert main(["resolve", src, "--out", str(tmp_path / "o"), "--task-suffix", "Analyze..."]) == EXIT_OK
    rows = [l.split("\t") for l in (tmp_path / "o" / "names.tsv").read_text().splitlines()[1:]]
    assert [r[2] for r in rows] == ["fixture", "fixture", "fixture", "unresolved"]
    assert rows[0][5] == "Image shows [Phenylboronic acid, phenylboronic acid] (SMILES: [OB(O)c1ccccc1]). Analyze..."
    assert rows[1][3] == "methyl 4-(4-bromophenyl)benzoate"
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["lookups"] == 3  # the repeated line is a memo hit


def test_resolve_empty_input(tmp_path):
    src = write(tmp_path / "s.smi", [])
    assert main(["resolve", src, "--out", str(tmp_path / "o")]) == EXIT_OK
    assert (tmp_path / "o" / "names.tsv").read_text().splitlines() == ["smiles\tcanonical\tsource\tiupac\tsynonyms\tprompt"]


def test_resolve_live_without_network_warns(tmp_path, caplog):
    # The offline switch set by the test suite downgrades live mode, so nothing leaves the machine.
    src = write(tmp_path / "s.smi", ["CCCCCCCCCCCCCCCCCN"])
    assert main(["resolve", src, "--mode", "live", "--out", str(tmp_path / "o")]) == EXIT_OK
    assert "could be resolved" in caplog.text

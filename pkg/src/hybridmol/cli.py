"""Command-line entry point: decompose, reconstruct, eval, generate, resolve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from . import __version__

log = logging.getLogger("hybridmol")

EXIT_OK, EXIT_ITEM_FAILURE, EXIT_STARTUP = 0, 1, 2


class StartupError(Exception):
    """Bad configuration detected before any item is processed."""


@dataclass
class ItemStatus:
    index: int
    input: str
    status: str  # "ok" or "failed"
    message: str = ""
    output: str = ""


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    inputs: list[str]
    output: str
    seed: int
    items: list[ItemStatus] = field(default_factory=list)
    started: float = 0.0
    elapsed_s: float = 0.0

    @property
    def failures(self) -> int:
        return sum(i.status != "ok" for i in self.items)

    def write(self, out: Path) -> None:
        doc = asdict(self)
        doc["counts"] = {"total": len(self.items), "ok": len(self.items) - self.failures,
                         "failed": self.failures}
        (out / "manifest.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    def cell(v: Any) -> str:
        return str(v).replace("\t", " ").replace("\n", " ")

    lines = ["\t".join(header)] + ["\t".join(cell(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map; per-item work runs on up to ``jobs`` threads."""
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(jobs) as pool:
        return list(pool.map(fn, items))


def _out_dir(path: str | None, default: str) -> Path:
    out = Path(path or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_lines(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StartupError(f"cannot read {path}: {exc}") from exc
    return text.splitlines()


def _read_molecules(paths: Sequence[str]) -> list[tuple[str, str]]:
    """(label, payload) per molecule; payload is SMILES or a MOL block prefixed with 'MOL:'."""
    out = []
    for path in paths:
        p = Path(path)
        if p.suffix.lower() in (".mol", ".sdf"):
            try:
                text = p.read_text(encoding="utf-8")
            except OSError as exc:
                raise StartupError(f"cannot read {path}: {exc}") from exc
            for k, block in enumerate(b for b in text.split("$$$$") if b.strip()):
                out.append((f"{p.name}#{k + 1}", "MOL:" + block.strip("\n") + "\n"))
        else:
            for k, line in enumerate(_read_lines(path)):
                line = line.strip()
                if line and not line.startswith("#"):
                    out.append((f"{p.name}:{k + 1}", line.split()[0]))
    return out


# -- commands -------------------------------------------------------------------------

def cmd_decompose(args) -> int:
    from .anchor import compute_anchors, dumps_hybrid
    from .fgdict import decompose, default_dictionary, load_priority_file
    from .molgraph import generate_2d_coords, parse_molfile, parse_smiles, sanitize
    from .molgraph.layout import OVERLAP_FLAG

    try:
        dictionary = load_priority_file(args.priority_list) if args.priority_list else default_dictionary()
    except Exception as exc:
        raise StartupError(f"unreadable priority list {args.priority_list}: {exc}") from exc
    mols = _read_molecules(args.inputs)
    out = _out_dir(args.out, "hybrid_out")
    docs = out / "hybrid"
    docs.mkdir(exist_ok=True)

    def work(item):
        i, (label, payload) = item
        try:
            g = parse_molfile(payload[4:]) if payload.startswith("MOL:") else parse_smiles(payload)
            g = sanitize(g)
            if not g.has_coords:
                g = generate_2d_coords(g)
            if OVERLAP_FLAG in g.flags:
                log.warning("%s: 2D layout has overlapping atoms", label)
            hybrid, anchors = compute_anchors(g, decompose(g, dictionary))
        except Exception as exc:
            return ItemStatus(i, label, "failed", f"{type(exc).__name__}: {exc}"), None
        name = f"{i:06d}.json"
        (docs / name).write_text(dumps_hybrid(hybrid, anchors) + "\n", encoding="utf-8")
        return ItemStatus(i, label, "ok", "", f"hybrid/{name}"), hybrid

    results = _map(work, list(enumerate(mols)), args.jobs)
    manifest = _manifest(args, "decompose", args.inputs, out)
    manifest.items = [r[0] for r in results]
    _write_tsv(out / "report.tsv", ["index", "input", "status", "groups", "residual_atoms", "output", "message"],
               [(s.index, s.input, s.status, len(h.super_nodes) if h else "",
                 len(h.residual_atoms) if h else "", s.output, s.message) for s, h in results])
    return _finish(manifest, out)


def _hybrid_paths(inputs: Sequence[str]) -> list[Path]:
    out = []
    for p in map(Path, inputs):
        if p.is_dir():
            out.extend(sorted(p.glob("*.json")))
        elif p.exists():
            out.append(p)
        else:
            raise StartupError(f"no such file or directory: {p}")
    return out


def cmd_reconstruct(args) -> int:
    from .anchor import parse_hybrid
    from .dvm import ReconstructionError, reconstruct
    from .fgdict import default_dictionary, load_priority_file
    from .molgraph import canonical_smiles

    try:
        dictionary = load_priority_file(args.priority_list) if args.priority_list else default_dictionary()
    except Exception as exc:
        raise StartupError(f"unreadable priority list {args.priority_list}: {exc}") from exc
    paths = _hybrid_paths(args.inputs)
    out = _out_dir(args.out, "reconstruct_out")

    def work(item):
        i, path = item
        try:
            hybrid, anchors = parse_hybrid(path.read_text(encoding="utf-8"), dictionary)
            smi = canonical_smiles(reconstruct(hybrid, anchors, dictionary))
        except ReconstructionError as exc:
            detail = "; ".join(str(p) for p in getattr(exc, "problems", ())) or str(exc)
            return ItemStatus(i, str(path), "failed", f"sanitize: {detail}")
        except Exception as exc:
            return ItemStatus(i, str(path), "failed", f"{type(exc).__name__}: {exc}")
        return ItemStatus(i, str(path), "ok", "", smi)

    manifest = _manifest(args, "reconstruct", [str(p) for p in paths], out)
    manifest.items = _map(work, list(enumerate(paths)), args.jobs)
    for s in manifest.items:
        print(s.output if s.status == "ok" else f"# {s.input}: {s.message}")
    (out / "smiles.txt").write_text("".join(f"{s.output}\n" for s in manifest.items), encoding="utf-8")
    _write_tsv(out / "report.tsv", ["index", "input", "status", "smiles", "diagnostic"],
               [(s.index, s.input, s.status, s.output, s.message) for s in manifest.items])
    return _finish(manifest, out)


def cmd_eval(args) -> int:
    from .fingerprint import GroundTruthError, l1_detail

    pred = _read_lines(args.pred)
    gt = _read_lines(args.gt)
    if len(pred) != len(gt):
        raise StartupError(f"line count mismatch: {len(pred)} predictions vs {len(gt)} references")
    out = _out_dir(args.out, "eval_out")
    rows, items = [], []
    for i, (p, g) in enumerate(zip(pred, gt)):
        try:
            r = l1_detail(p.strip(), g.strip())
        except GroundTruthError as exc:
            items.append(ItemStatus(i, g, "failed", str(exc)))
            rows.append((i + 1, p, g, "", "invalid_reference"))
            continue
        items.append(ItemStatus(i, g, "ok", r.reason, str(r.score)))
        rows.append((i + 1, p, g, r.score, r.reason))
    scored = [int(s.output) for s in items if s.status == "ok"]
    mean = sum(scored) / len(scored) if scored else 0.0
    _write_tsv(out / "scores.tsv", ["line", "pred", "gt", "l1_score", "reason"], rows)
    manifest = _manifest(args, "eval", [args.pred, args.gt], out)
    manifest.items = items
    manifest.config["aggregate"] = round(mean, 1)
    print(f"{mean:.1f}")
    return _finish(manifest, out)


def cmd_generate(args) -> int:
    from .datagen import GenerationError, MixError, generate_batch, parse_mix, parse_reaction_smiles, write_dataset

    try:
        mix = parse_mix(args.mix)
    except MixError as exc:
        raise StartupError(str(exc)) from exc
    sources, items = [], []
    for k, line in enumerate(_read_lines(args.source)):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            sources.append(parse_reaction_smiles(line) if ">" in line else line.split()[0])
        except GenerationError as exc:
            items.append(ItemStatus(k, line, "failed", str(exc)))
    if args.count and not sources:
        raise StartupError(f"{args.source} has no usable sources")
    out = _out_dir(args.out, "dataset_out")
    dataset = generate_batch(sources, args.count, mix, args.seed, args.jobs)
    write_dataset(dataset, out, svg=not args.no_svg)
    _write_tsv(out / "report.tsv", ["index", "seed", "archetype", "status", "source", "reason"],
               [(m.index, m.seed, m.archetype, m.status, m.source, m.reason) for m in dataset.manifest])
    counts = dataset.archetype_counts()
    print("\t".join(f"{k}={v}" for k, v in sorted(counts.items())))
    skipped = sum(m.status != "ok" for m in dataset.manifest)
    if skipped:
        log.warning("%d samples skipped (see manifest.json)", skipped)
    # Skipped samples are soft failures; only unparseable source lines are hard ones.
    manifest = _manifest(args, "generate", [args.source], out, run_file="run_manifest.json")
    manifest.items = items
    manifest.config["archetype_counts"] = counts
    return _finish(manifest, out, "run_manifest.json")


def cmd_resolve(args) -> int:
    from .activation import Resolver, build_prompt, canonical_key
    from .molgraph import ChemError

    lines = [l.strip() for l in _read_lines(args.smiles) if l.strip() and not l.startswith("#")]
    out = _out_dir(args.out, "resolve_out")
    resolver = Resolver(args.mode, args.cache_dir)
    rows, items = [], []
    for i, smi in enumerate(lines):
        smi = smi.split()[0]
        try:
            canon = canonical_key(smi)
        except ChemError as exc:
            items.append(ItemStatus(i, smi, "failed", f"unparseable SMILES: {exc}"))
            rows.append((smi, "", "unresolved", "", "", ""))
            continue
        names = resolver.resolve(smi)
        prompt = build_prompt(names, smi, args.task_suffix)
        items.append(ItemStatus(i, smi, "ok", names.source, prompt))
        rows.append((smi, canon, names.source, names.iupac, "; ".join(names.common), prompt))
    _write_tsv(out / "names.tsv", ["smiles", "canonical", "source", "iupac", "synonyms", "prompt"], rows)
    if args.mode == "live" and rows and all(r[2] == "unresolved" for r in rows):
        log.warning("no SMILES could be resolved (network unavailable and cache empty?)")
    manifest = _manifest(args, "resolve", [args.smiles], out)
    manifest.items = items
    manifest.config["lookups"] = resolver.lookups
    return _finish(manifest, out)


# -- plumbing -------------------------------------------------------------------------

def _manifest(args, command: str, inputs: Sequence[str], out: Path, run_file: str = "") -> RunManifest:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "inputs") and not k.startswith("_")}
    return RunManifest(command, config, list(map(str, inputs)), str(out), args.seed,
                       started=args._started)


def _finish(manifest: RunManifest, out: Path, name: str = "manifest.json") -> int:
    manifest.elapsed_s = round(time.time() - manifest.started, 3)
    manifest.started = round(manifest.started, 3)
    if name == "manifest.json":
        manifest.write(out)
    else:
        doc = asdict(manifest)
        doc["counts"] = {"total": len(manifest.items), "failed": manifest.failures}
        (out / name).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    if manifest.failures:
        log.error("%d of %d items failed", manifest.failures, len(manifest.items))
    return EXIT_ITEM_FAILURE if manifest.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="global seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads per command")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hybridmol", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hybridmol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="molecules -> hybrid documents")
    p.add_argument("inputs", nargs="+", help="SMILES files (one per line) or MOL/SDF files")
    p.add_argument("--priority-list", help="priority list file (default: shipped list)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", parents=[common], help="hybrid documents -> SMILES")
    p.add_argument("inputs", nargs="*", help="hybrid JSON files or directories")
    p.add_argument("--priority-list", help="priority list file (default: shipped list)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", parents=[common], help="strict L1 score of line-aligned SMILES files")
    p.add_argument("pred")
    p.add_argument("gt")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", parents=[common], help="synthetic dataset generation")
    p.add_argument("source", help="lines of SMILES or reaction SMILES (reactants>conditions>products)")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mix", default="0.70,0.15,0.15", help="Linear,MultiLine,TreeGraph probabilities")
    p.add_argument("--no-svg", action="store_true", help="skip writing SVG files")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("resolve", parents=[common], help="SMILES -> entity names and prompts")
    p.add_argument("smiles", help="file with one SMILES per line")
    p.add_argument("--mode", choices=("live", "offline"), default="offline")
    p.add_argument("--cache-dir", help="on-disk response cache")
    p.add_argument("--task-suffix", default="", help="text appended to every prompt")
    p.set_defaults(func=cmd_resolve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args._started = time.time()
    try:
        return args.func(args)
    except StartupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STARTUP


if __name__ == "__main__":
    sys.exit(main())

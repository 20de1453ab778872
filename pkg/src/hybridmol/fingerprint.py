"""Morgan circular fingerprints, Tanimoto similarity and the strict L1 score."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .molgraph import ChemError, ContractError, MolecularGraph, parse_smiles, sanitize
from .molgraph.canon import BOND_CODE

_MASK = (1 << 64) - 1
DEFAULT_BITS = 2048
DEFAULT_RADIUS = 2


def mix64(x: int) -> int:
    """splitmix64 finalizer: a fixed, platform-independent 64-bit mixer."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def hash_tuple(values) -> int:
    """Order-sensitive hash of a sequence of non-negative ints."""
    h = 0x9E3779B97F4A7C15
    for v in values:
        h = mix64(h ^ mix64(v & _MASK))
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: np.ndarray = field(compare=False)
    radius: int = DEFAULT_RADIUS
    empty_input: bool = False

    @property
    def n_bits(self) -> int:
        return int(self.bits.size)

    def on_bits(self) -> list[int]:
        return np.flatnonzero(self.bits).tolist()

    def to_hex(self) -> str:
        """Big-endian hex of the packed bit vector (bit 0 is the MSB of byte 0)."""
        return np.packbits(self.bits).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        return cls(np.unpackbits(raw).astype(bool), radius)

    @classmethod
    def from_bits(cls, on: list[int], n_bits: int = DEFAULT_BITS) -> "Fingerprint":
        bits = np.zeros(n_bits, dtype=bool)
        bits[list(on)] = True
        return cls(bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.radius, self.bits.tobytes()))


def _atom_invariant(graph: MolecularGraph, i: int) -> int:
    a = graph.atoms[i]
    return hash_tuple((a.atomic_number, graph.degree(i), a.charge + 8,
                       graph.hydrogens(i), int(a.is_aromatic)))


def morgan_fingerprint(graph: MolecularGraph, radius: int = DEFAULT_RADIUS,
                       n_bits: int = DEFAULT_BITS) -> Fingerprint:
    """Binary Morgan fingerprint.

    Each iteration hashes (radius, own id, sorted (bond code, neighbour id)).
    Every radius-0 id sets bit ``id mod n_bits``; larger environments set a
    bit only when they cover a bond set not seen before.
    """
    if radius < 0:
        raise ContractError("radius must be >= 0")
    if n_bits < 64 or n_bits & (n_bits - 1):
        raise ContractError("n_bits must be a power of two >= 64")
    bits = np.zeros(n_bits, dtype=bool)
    n = len(graph.atoms)
    if n == 0:
        return Fingerprint(bits, radius, empty_input=True)
    ids = [_atom_invariant(graph, i) for i in range(n)]
    for i in ids:
        bits[i % n_bits] = True
    adj = graph.adjacency
    bond_id = {b.key: k for k, b in enumerate(graph.bonds)}
    env_bonds = [frozenset() for _ in range(n)]
    seen_envs: set[frozenset[int]] = set()
    for r in range(1, radius + 1):
        new, grown = [], []
        for i in range(n):
            env = sorted((BOND_CODE[o], ids[j]) for j, o in adj[i])
            flat = [r, ids[i]]
            for code, nid in env:
                flat.extend((code, nid))
            new.append(hash_tuple(flat))
            covered = env_bonds[i].union(
                *(env_bonds[j] for j in graph.neighbors(i)),
                (bond_id[frozenset((i, j))] for j in graph.neighbors(i)),
            )
            grown.append(covered)
        # An environment that covers no new bond set adds nothing (methane stops at radius 0).
        for h, covered, old_cov in sorted(zip(new, grown, env_bonds), key=lambda t: t[0]):
            if covered == old_cov or covered in seen_envs:
                continue
            seen_envs.add(covered)
            bits[h % n_bits] = True
        ids, env_bonds = new, grown
    return Fingerprint(bits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a & b| / |a | b|; 1.0 when both are empty."""
    if a.n_bits != b.n_bits:
        raise ContractError(f"fingerprint lengths differ ({a.n_bits} vs {b.n_bits})")
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a.bits & b.bits)) / union


class GroundTruthError(ValueError):
    """The reference SMILES is invalid; this is a configuration problem."""


@dataclass(frozen=True)
class L1Result:
    score: int
    reason: str  # "match" | "mismatch" | "pred_unparseable"
    similarity: float


def l1_detail(pred: str, gt: str) -> L1Result:
    try:
        g_gt = sanitize(parse_smiles(gt))
    except ChemError as exc:
        raise GroundTruthError(f"ground-truth SMILES {gt!r} is invalid: {exc}") from exc
    try:
        g_pred = sanitize(parse_smiles(pred))
    except ChemError:
        return L1Result(0, "pred_unparseable", 0.0)
    sim = tanimoto(morgan_fingerprint(g_pred), morgan_fingerprint(g_gt))
    return L1Result(100 if sim == 1.0 else 0, "match" if sim == 1.0 else "mismatch", sim)


def l1_score(pred: str, gt: str) -> int:
    """Strict recognition score: 100 when the fingerprints are identical, else 0."""
    return l1_detail(pred, gt).score

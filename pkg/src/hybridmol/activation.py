"""Entity resolution (SMILES -> names) and name-first prompt construction.

Live lookups use the PubChem PUG-REST interface:

* ``POST {BASE}/compound/smiles/property/IUPACName/JSON`` (form field ``smiles``)
  -> ``PropertyTable.Properties[0].IUPACName``
* ``POST {BASE}/compound/smiles/synonyms/JSON`` (form field ``smiles``)
  -> ``InformationList.Information[0].Synonym``

Responses are cached on disk under ``<cache_dir>/<sha1(canonical SMILES)>.json``
holding ``{"canonical", "raw", "names", "timestamp"}``; entries never expire.
Setting ``HYBRIDMOL_OFFLINE=1`` forces offline mode.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .molgraph import ChemError, canonical_smiles, parse_smiles, sanitize
from .reaction import ReactionRecord

log = logging.getLogger(__name__)

PUBCHEM_BASE = "https://pubchem.ncbi.nlm.nih.gov/rest/pug"
MAX_SYNONYMS = 3
REQUESTS_PER_SECOND = 5
OFFLINE_ENV = "HYBRIDMOL_OFFLINE"
SOURCES = ("live", "cache", "fixture", "unresolved")


@dataclass(frozen=True)
class EntityNames:
    iupac: str = ""
    common: tuple[str, ...] = ()
    source: str = "unresolved"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        seen = set()
        for name in self.common:
            if name.casefold() in seen:
                raise ValueError(f"duplicate synonym {name!r}")
            seen.add(name.casefold())

    @property
    def resolved(self) -> bool:
        return bool(self.iupac or self.common)


def select_synonyms(synonyms: Sequence[str], iupac: str, limit: int = MAX_SYNONYMS
                    ) -> tuple[str, ...]:
    """Case-insensitive de-duplication, names differing from the IUPAC name first."""
    unique, seen = [], set()
    for s in synonyms:
        s = s.strip()
        if s and s.casefold() not in seen:
            seen.add(s.casefold())
            unique.append(s)
    differing = [s for s in unique if s.casefold() != iupac.casefold()]
    same = [s for s in unique if s.casefold() == iupac.casefold()]
    return tuple((differing + same)[:limit])


def names_from_raw(raw: Mapping[str, Any], source: str) -> EntityNames:
    props = raw.get("PropertyTable", {}).get("Properties", [])
    info = raw.get("InformationList", {}).get("Information", [])
    if len(props) > 1 or len(info) > 1:
        log.info("service returned %d/%d records; using the first", len(props), len(info))
    iupac = str(props[0].get("IUPACName", "")) if props else ""
    synonyms = info[0].get("Synonym", []) if info else []
    names = EntityNames(iupac, select_synonyms(synonyms, iupac), source)
    return names if names.resolved else EntityNames()


def canonical_key(smiles: str) -> str:
    return canonical_smiles(sanitize(parse_smiles(smiles)))


# -- cache -------------------------------------------------------------------------

class DiskCache:
    """One JSON file per canonical SMILES; atomic replace on write."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self._lock = threading.Lock()

    def path(self, canonical: str) -> Path:
        return self.dir / (hashlib.sha1(canonical.encode("utf-8")).hexdigest() + ".json")

    def get(self, canonical: str) -> dict | None:
        p = self.path(canonical)
        if not p.exists():
            return None
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            log.warning("unreadable cache entry %s", p)
            return None

    def put(self, canonical: str, raw: Mapping[str, Any], names: EntityNames) -> None:
        record = {"canonical": canonical, "raw": raw,
                  "names": {"iupac": names.iupac, "common": list(names.common)},
                  "timestamp": time.time()}
        with self._lock:
            self.dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record, fh, indent=2, sort_keys=True)
            os.replace(tmp, self.path(canonical))


def load_fixtures(path: str | Path | None = None) -> dict[str, dict]:
    """Canonical SMILES -> raw payload from a fixture file (default: shipped fixtures)."""
    if path is None:
        text = resources.files("hybridmol.data").joinpath("entity_fixtures.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    return {canonical_key(e["smiles"]): e["raw"] for e in doc.get("entries", [])}


# -- live client ---------------------------------------------------------------------

class RateLimiter:
    def __init__(self, per_second: float = REQUESTS_PER_SECOND):
        self.interval = 1.0 / per_second
        self._lock = threading.Lock()
        self._next = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            delay = self._next - now
            self._next = max(now, self._next) + self.interval
        if delay > 0:
            time.sleep(delay)


class PubChemClient:
    """Rate-limited PUG-REST client with exponential backoff on throttling."""

    def __init__(self, base: str = PUBCHEM_BASE, session=None, timeout: float = 10.0,
                 retries: int = 3, limiter: RateLimiter | None = None):
        self.base = base
        self.timeout = timeout
        self.retries = retries
        self.limiter = limiter or RateLimiter()
        self._session = session

    @property
    def session(self):
        if self._session is None:
            import requests
            self._session = requests.Session()
        return self._session

    def _post(self, path: str, smiles: str) -> dict:
        delay = 0.5
        for attempt in range(self.retries + 1):
            self.limiter.wait()
            resp = self.session.post(f"{self.base}/{path}", data={"smiles": smiles},
                                     timeout=self.timeout)
            if resp.status_code in (429, 503) and attempt < self.retries:
                time.sleep(delay)
                delay *= 2
                continue
            resp.raise_for_status()
            return resp.json()
        raise RuntimeError("unreachable")

    def fetch(self, smiles: str) -> dict:
        props = self._post("compound/smiles/property/IUPACName/JSON", smiles)
        try:
            syns = self._post("compound/smiles/synonyms/JSON", smiles)
        except Exception as exc:  # synonyms are optional
            log.info("synonym lookup failed for %s: %s", smiles, exc)
            syns = {}
        return {**props, **syns}


# -- resolution -----------------------------------------------------------------------

class Resolver:
    """Resolution front-end: memo, disk cache, live service, fixtures, in that order."""

    def __init__(self, mode: str = "offline", cache_dir: str | Path | None = None,
                 fixtures: Mapping[str, dict] | None = None, client: PubChemClient | None = None):
        if mode not in ("live", "offline"):
            raise ValueError(f"mode must be 'live' or 'offline' (got {mode!r})")
        if os.environ.get(OFFLINE_ENV, "") not in ("", "0"):
            mode = "offline"
        self.mode = mode
        self.cache = DiskCache(cache_dir) if cache_dir else None
        self.fixtures = load_fixtures() if fixtures is None else dict(fixtures)
        self.client = client
        self._memo: dict[str, EntityNames] = {}
        self._lock = threading.Lock()
        self.lookups = 0  # resolutions that missed the in-memory memo

    def resolve(self, smiles: str) -> EntityNames:
        try:
            key = canonical_key(smiles)
        except ChemError as exc:
            log.warning("cannot canonicalize %r: %s", smiles, exc)
            return EntityNames()
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        names = self._resolve_uncached(key)
        with self._lock:
            self._memo.setdefault(key, names)
            return self._memo[key]

    def _resolve_uncached(self, key: str) -> EntityNames:
        self.lookups += 1
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return names_from_raw(hit.get("raw", {}), "cache")
        if self.mode == "live":
            client = self.client or PubChemClient()
            try:
                raw = client.fetch(key)
            except Exception as exc:
                log.warning("live lookup failed for %s: %s", key, exc)
            else:
                names = names_from_raw(raw, "live")
                if self.cache is not None:
                    self.cache.put(key, raw, names)
                return names
        if key in self.fixtures:
            return names_from_raw(self.fixtures[key], "fixture")
        return EntityNames()


def resolve_entities(smiles: str, mode: str = "offline", cache_dir: str | Path | None = None,
                     fixtures: Mapping[str, dict] | None = None) -> EntityNames:
    return Resolver(mode, cache_dir, fixtures).resolve(smiles)


# -- prompts -------------------------------------------------------------------------

def build_prompt(names: EntityNames, smiles: str, task_suffix: str = "") -> str:
    if not smiles:
        raise ValueError("smiles must be non-empty")
    parts = [*names.common, *([names.iupac] if names.iupac else [])]
    head = f"Image shows [{', '.join(parts)}] " if parts else "Image shows "
    text = f"{head}(SMILES: [{smiles}])."
    return f"{text} {task_suffix}" if task_suffix else text


def _role_labels(record: ReactionRecord) -> list[tuple[str, str]]:
    out = []
    for i, s in enumerate(record.reactants, start=1):
        out.append(("Reactant1" if i == 1 else f"Reagents{i}", s))
    for i, s in enumerate(record.products, start=1):
        out.append((f"Product{i}", s))
    return out


def build_reaction_context(record: ReactionRecord, names: Mapping[str, EntityNames] | None = None,
                           separator: str = ", ") -> str:
    """Supplementary-information text: one entry per component, then conditions.

    Each component reads ``<role>: <SMILES>, Synonyms: <...>, IUPAC Name: <...>``;
    with ``names=None`` only ``<role>: <SMILES>`` is written. Entries are
    joined by ``separator``; the default yields a single line.
    """
    entries = []
    for role, smiles in _role_labels(record):
        if names is None:
            entries.append(f"{role}: {smiles}")
            continue
        n = names.get(smiles, EntityNames())
        entries.append(f"{role}: {smiles}, Synonyms: {', '.join(n.common)}, IUPAC Name: {n.iupac}")
    entries.append(f"Reagents: {', '.join(record.reagents)} ; solvents: {', '.join(record.solvents)}")
    return separator.join(entries)

"""Tweet client ("source") classification.

Every client name falls in exactly one of four classes: regular first-party
clients, scheduling services, impersonated (fake) versions of known apps, and
everything else. Impersonations are whitespace- or case-mangled copies of a
canonical app name, plus an explicit ``known_fakes`` list for renamed clones.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .corpus import Account


class SourceClass(str, Enum):
    REGULAR = "regular"
    SCHEDULING = "scheduling"
    FAKE = "fake"
    OTHER = "other"


@dataclass(frozen=True)
class SourceCatalog:
    regular: frozenset[str]
    scheduling: frozenset[str]
    canonical: frozenset[str]
    known_fakes: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "canonical", frozenset(self.canonical | self.regular))
        object.__setattr__(self, "_collapsed", {collapse(c): c for c in sorted(self.canonical)})

    @classmethod
    def from_dict(cls, d: dict) -> "SourceCatalog":
        return cls(
            regular=frozenset(d["regular"]),
            scheduling=frozenset(d["scheduling"]),
            canonical=frozenset(d.get("canonical", ())),
            known_fakes=frozenset(d.get("known_fakes", ())),
        )

    @classmethod
    def load(cls, path=None) -> "SourceCatalog":
        """Load a JSON catalog; ``None`` loads the shipped default."""
        if path is None:
            text = (resources.files("trolltrace") / "data" / "catalog.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "regular": sorted(self.regular),
            "scheduling": sorted(self.scheduling),
            "canonical": sorted(self.canonical),
            "known_fakes": sorted(self.known_fakes),
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False).encode()
        return hashlib.sha256(blob).hexdigest()


_DEFAULT: SourceCatalog | None = None


def default_catalog() -> SourceCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = SourceCatalog.load()
    return _DEFAULT


def collapse(name: str) -> str:
    return " ".join(name.split()).lower()


def is_fake_source(name: str, catalog: SourceCatalog | None = None) -> bool:
    catalog = catalog or default_catalog()
    if name in catalog.canonical:
        return False
    if name in catalog.known_fakes:
        return True
    # a collapse-equal canonical name that differs from `name` is necessarily
    # a whitespace or casing mangle, because `name` itself is not canonical
    return collapse(name) in catalog._collapsed


def classify_source(name: str, catalog: SourceCatalog | None = None) -> SourceClass:
    catalog = catalog or default_catalog()
    if name in catalog.regular:
        return SourceClass.REGULAR
    if name in catalog.scheduling:
        return SourceClass.SCHEDULING
    if is_fake_source(name, catalog):
        return SourceClass.FAKE
    return SourceClass.OTHER


@dataclass(frozen=True)
class SourceStats:
    distinct_sources: int = 0
    fraction_fake: float = 0.0
    fraction_regular: float = 0.0
    fraction_scheduled: float = 0.0


def source_stats(account: Account, catalog: SourceCatalog | None = None) -> SourceStats:
    catalog = catalog or default_catalog()
    n = len(account.tweets)
    if n == 0:
        return SourceStats()
    counts = {c: 0 for c in SourceClass}
    names = set()
    for t in account.tweets:
        names.add(t.client_name)
        counts[classify_source(t.client_name, catalog)] += 1
    return SourceStats(
        distinct_sources=len(names),
        fraction_fake=counts[SourceClass.FAKE] / n,
        fraction_regular=counts[SourceClass.REGULAR] / n,
        fraction_scheduled=counts[SourceClass.SCHEDULING] / n,
    )


def uses_fake_source(account: Account, catalog: SourceCatalog | None = None) -> bool:
    catalog = catalog or default_catalog()
    return any(is_fake_source(t.client_name, catalog) for t in account.tweets)

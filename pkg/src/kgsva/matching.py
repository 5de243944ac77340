"""Fuzzy matching of specification names against RTL identifiers."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import yaml

from .assets import read_asset

MIN_SCORE = 0.6
EXACT, ABBREVIATION, NORMALIZATION, ACTIVE_LOW, EDIT_DISTANCE = (
    "exact",
    "abbreviation",
    "normalization",
    "active_low",
    "edit_distance",
)

_SEPARATORS = re.compile(r"[\s_\-]+")
_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


class AbbrevDict:
    """Full term <-> abbreviation pairs; every term resolves to its full form."""

    def __init__(self, pairs: Dict[str, Iterable[str]]):
        self.pairs: Dict[str, List[str]] = {}
        self._canonical: Dict[str, str] = {}
        for full, abbrevs in pairs.items():
            abbrevs = [abbrevs] if isinstance(abbrevs, str) else list(abbrevs)
            full = full.lower()
            self.pairs[full] = [a.lower() for a in abbrevs]
            self._canonical[full] = full
            for a in self.pairs[full]:
                self._canonical[a] = full

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "AbbrevDict":
        text = Path(path).read_text(encoding="utf-8") if path else read_asset("abbreviations.yaml")
        return cls(yaml.safe_load(text) or {})

    @property
    def inverse(self) -> Dict[str, str]:
        return {a: full for full, abbrevs in self.pairs.items() for a in abbrevs}

    def canonical(self, word: str) -> str:
        return self._canonical.get(word, word)


def words(name: str) -> List[str]:
    """Lower-case words of an identifier or phrase (underscores, spaces, camelCase)."""
    parts = _SEPARATORS.split(_CAMEL.sub(" ", name.strip()))
    return [p.lower() for p in parts if p]


def normalize(name: str) -> str:
    return _SEPARATORS.sub("", name.lower())


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _active_low_bases(name: str) -> List[str]:
    low = name.lower()
    bases = []
    for suffix in ("_n", "_b"):
        if low.endswith(suffix):
            bases.append(low[: -len(suffix)])
    if len(name) > 1 and name.endswith("n") and name[-2].isupper():
        bases.append(low[:-1])  # PRESETn style
    if low.startswith("not_"):
        bases.append(low[4:])
    if low.startswith("n") and len(low) > 1:
        bases.append(low[1:])
    return [normalize(b) for b in bases if normalize(b)]


def match_score(spec_name: str, rtl_name: str, abbrevs: AbbrevDict) -> Tuple[float, str]:
    """Score and rule for a (spec name, RTL name) pair; first applicable rule wins."""
    if spec_name == rtl_name:
        return 1.0, EXACT
    na, nb = normalize(spec_name), normalize(rtl_name)
    if na != nb:
        ca = "".join(abbrevs.canonical(w) for w in words(spec_name))
        cb = "".join(abbrevs.canonical(w) for w in words(rtl_name))
        if ca == cb:
            return 0.9, ABBREVIATION
    if na == nb:
        return 0.8, NORMALIZATION
    if nb in _active_low_bases(spec_name) or na in _active_low_bases(rtl_name):
        return 0.8, ACTIVE_LOW
    d = levenshtein(na, nb)
    if d > math.ceil(max(len(na), len(nb)) / 4):
        return 0.0, EDIT_DISTANCE
    return max(0.0, (8 - d) / 10), EDIT_DISTANCE


@dataclass
class MatchResult:
    spec_node: str
    rtl_node: str
    score: float
    method: str

    def to_dict(self) -> dict:
        return {"spec_node": self.spec_node, "rtl_node": self.rtl_node, "score": self.score, "method": self.method}

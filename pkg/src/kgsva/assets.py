"""Bundled editable assets: prompt templates, schema and abbreviation dictionary."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .graph import Schema

_SLOT_RE = re.compile(r"\{(\w+)\}")


def read_asset(name: str) -> str:
    return resources.files("kgsva").joinpath("assets", name).read_text(encoding="utf-8")


def render(template: str, **slots: object) -> str:
    """Fill ``{name}`` slots; braces not naming a given slot are left alone."""
    return _SLOT_RE.sub(lambda m: str(slots[m.group(1)]) if m.group(1) in slots else m.group(0), template)


def load_schema(path: Optional[Path] = None) -> Schema:
    text = Path(path).read_text(encoding="utf-8") if path else read_asset("schema.yaml")
    doc = yaml.safe_load(text)
    return Schema.from_lists(doc["entity_types"], doc["relation_types"])

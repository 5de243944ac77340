"""The unit of prompt context shared by retrieval, walks and synthesis."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional

SUMMARY_TYPES = ("summary_design", "summary_rtl", "summary_signals", "summary_patterns")
CTX_TYPES = SUMMARY_TYPES + ("signal_desc", "rag", "kg_path")
PRUNABLE_TYPES = ("rag", "kg_path")


@dataclass
class ContextItem:
    ctx_type: str
    text: str
    score: float = 0.0
    provenance: str = ""
    signal: str = ""
    degraded: bool = False

    def __post_init__(self):
        if self.ctx_type not in CTX_TYPES:
            raise ValueError(f"unknown context type {self.ctx_type!r}")
        if not self.text:
            raise ValueError("context text must be non-empty")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ContextItem":
        return cls(**d)


@dataclass
class SvaRecord:
    """One plan/assertion pair and, once checked, its verdict."""

    signal: str
    plan: str
    sva_text: str
    prompt_ordinal: int
    syntax_ok: Optional[bool] = None
    missing: bool = False
    unknown_signals: List[str] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SvaRecord":
        return cls(**d)

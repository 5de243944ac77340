"""Word-level tokenization used for chunk boundaries and token budgets."""

from __future__ import annotations

import re
from typing import List, Protocol, Tuple

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class Tokenizer(Protocol):
    def spans(self, text: str) -> List[Tuple[int, int]]: ...


class WordTokenizer:
    """Words and single punctuation marks; a stand-in for a subword tokenizer."""

    def spans(self, text: str) -> List[Tuple[int, int]]:
        return [m.span() for m in _TOKEN_RE.finditer(text)]

    def tokens(self, text: str) -> List[str]:
        return _TOKEN_RE.findall(text)


DEFAULT_TOKENIZER = WordTokenizer()


def collapse_ws(text: str) -> str:
    return " ".join(text.split())

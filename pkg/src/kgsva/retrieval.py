"""Signal-specific retrieval over multi-scale chunks of spec and RTL text.

Every document is chunked at each (scale, overlap) pair of the grid.  Chunks
get a TF-IDF vector and a dense hashed character n-gram vector; a query's
score against a chunk is the mean of the two cosines.
"""

from __future__ import annotations

import hashlib
import logging
import math
import pickle
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .contexts import ContextItem
from .text import DEFAULT_TOKENIZER, Tokenizer

logger = logging.getLogger(__name__)

DEFAULT_SCALES = (50, 100, 200, 800, 3200)
DEFAULT_OVERLAPS = (0.2, 0.4)
DEFAULT_TOP_K = 20
INDEX_VERSION = 1

_TERM_RE = re.compile(r"\w+")


class EmptyQueryError(ValueError):
    pass


@dataclass(frozen=True)
class SourceDoc:
    doc_id: str
    text: str
    source: str  # "spec" or "rtl"


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    scale: int
    overlap_ratio: float
    token_start: int
    token_end: int
    text: str
    source: str


@dataclass(frozen=True)
class Grid:
    scales: Tuple[int, ...] = DEFAULT_SCALES
    overlaps: Tuple[float, ...] = DEFAULT_OVERLAPS

    def __post_init__(self):
        if not self.scales or not self.overlaps:
            raise ValueError("chunking grid needs at least one scale and one overlap")
        if any(s < 1 for s in self.scales):
            raise ValueError("chunk scales must be positive")
        if any(not 0 <= o < 1 for o in self.overlaps):
            raise ValueError("overlap ratios must lie in [0, 1)")

    def pairs(self) -> List[Tuple[int, float]]:
        return [(s, o) for s in self.scales for o in self.overlaps]


def stride_for(scale: int, overlap: float) -> int:
    return max(1, round(scale * (1 - overlap)))


def chunk_starts(n_tokens: int, scale: int, stride: int) -> List[int]:
    """Window starts at multiples of ``stride``, stopping once a window reaches the end."""
    starts: List[int] = []
    if n_tokens == 0:
        return starts
    start = 0
    while True:
        starts.append(start)
        if start + scale >= n_tokens:
            return starts
        start += stride


def chunk_document(
    doc: SourceDoc, scale: int, overlap: float, tokenizer: Tokenizer = DEFAULT_TOKENIZER
) -> List[Chunk]:
    spans = tokenizer.spans(doc.text)
    stride = stride_for(scale, overlap)
    out = []
    for start in chunk_starts(len(spans), scale, stride):
        end = min(start + scale, len(spans))
        text = doc.text[spans[start][0] : spans[end - 1][1]]
        cid = f"{doc.doc_id}@{scale}/{round(overlap * 100):02d}/{start:06d}"
        out.append(Chunk(cid, doc.doc_id, scale, overlap, start, end, text, doc.source))
    return out


def terms(text: str) -> List[str]:
    return _TERM_RE.findall(text.lower())


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@lru_cache(maxsize=200_000)
def _bucket(gram: str, dimension: int) -> Tuple[int, float]:
    h = int.from_bytes(hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest(), "little")
    return h % dimension, (1.0 if (h >> 63) & 1 else -1.0)


class HashingEmbedder:
    """Signed feature hashing of character n-grams, L2-normalised."""

    def __init__(self, dimension: int = 256, ngram_range: Tuple[int, int] = (3, 5)):
        self.dimension = dimension
        self.ngram_range = ngram_range

    def embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        s = " ".join(text.lower().split())
        lo, hi = self.ngram_range
        for n in range(lo, hi + 1):
            for i in range(len(s) - n + 1):
                idx, sign = _bucket(s[i : i + n], self.dimension)
                vec[idx] += sign
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        return np.vstack([self.embed_one(t) for t in texts])


SparseVec = Dict[str, float]


def _l2(weights: Dict[str, float]) -> SparseVec:
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return {t: w / norm for t, w in weights.items()} if norm > 0 else {}


@dataclass
class ChunkIndex:
    chunks: List[Chunk]
    sparse_vectors: List[SparseVec]
    dense_vectors: np.ndarray
    vocabulary: Dict[str, int]  # term -> document frequency
    idf: Dict[str, float] = field(default_factory=dict)

    def sparse_query(self, text: str) -> SparseVec:
        counts = Counter(t for t in terms(text) if t in self.idf)
        return _l2({t: c * self.idf[t] for t, c in counts.items()})


def sparse_cosine(a: SparseVec, b: SparseVec) -> float:
    """Cosine of two unit-norm sparse vectors; identical vectors give exactly 1.0."""
    if not a or not b:
        return 0.0
    if a == b:
        return 1.0
    if len(a) > len(b):
        a, b = b, a
    return min(1.0, max(0.0, sum(w * b.get(t, 0.0) for t, w in a.items())))


def fit_tfidf(texts: Sequence[str]) -> Tuple[List[SparseVec], Dict[str, int], Dict[str, float]]:
    """Raw-count tf, smoothed idf ln((1+N)/(1+df)) + 1, L2-normalised rows."""
    counts = [Counter(terms(t)) for t in texts]
    df: Counter = Counter()
    for c in counts:
        df.update(c.keys())
    n = len(texts)
    idf = {t: math.log((1 + n) / (1 + d)) + 1 for t, d in df.items()}
    vectors = [_l2({t: c * idf[t] for t, c in row.items()}) for row in counts]
    return vectors, dict(df), idf


def build_index(
    docs: Sequence[SourceDoc],
    embedder: Optional[EmbeddingProvider] = None,
    grid: Grid = Grid(),
    source_grids: Optional[Dict[str, Grid]] = None,
    tokenizer: Tokenizer = DEFAULT_TOKENIZER,
    workers: int = 1,
) -> ChunkIndex:
    if not docs:
        raise ValueError("retrieval index needs at least one document")
    embedder = embedder or HashingEmbedder()
    jobs = []
    for doc in docs:
        g = (source_grids or {}).get(doc.source, grid)
        jobs.extend((doc, s, o) for s, o in g.pairs())
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda j: chunk_document(j[0], j[1], j[2], tokenizer), jobs))
    chunks = [c for part in parts for c in part]
    sparse, vocab, idf = fit_tfidf([c.text for c in chunks])
    dense = embedder.embed([c.text for c in chunks])
    logger.info("indexed %d chunks from %d documents", len(chunks), len(docs))
    return ChunkIndex(chunks, sparse, dense, vocab, idf)


def component_scores(
    index: ChunkIndex, query: str, embedder: Optional[EmbeddingProvider] = None
) -> List[Tuple[float, float]]:
    """(sparse cosine, dense cosine) of ``query`` against every chunk, in index order."""
    if not query.strip():
        raise EmptyQueryError("retrieval query is empty")
    if embedder is None:
        embedder = HashingEmbedder(index.dense_vectors.shape[1] if index.dense_vectors.ndim == 2 else 256)
    q_sparse = index.sparse_query(query)
    dense = index.dense_vectors @ embedder.embed([query])[0] if index.chunks else np.zeros(0)
    return [(sparse_cosine(q_sparse, vec), float(d)) for vec, d in zip(index.sparse_vectors, dense)]


def retrieve(
    index: ChunkIndex, query: str, k: int = DEFAULT_TOP_K, embedder: Optional[EmbeddingProvider] = None
) -> List[Tuple[Chunk, float]]:
    """Top ``k`` chunks by the mean of sparse and dense cosine; ties go to the smaller chunk id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    parts = component_scores(index, query, embedder)
    scored = [(chunk, (s + d) / 2) for chunk, (s, d) in zip(index.chunks, parts)]
    scored.sort(key=lambda cs: (-cs[1], cs[0].chunk_id))
    return scored[:k]


def chunks_to_contexts(results: Sequence[Tuple[Chunk, float]], signal: str = "") -> List[ContextItem]:
    return [
        ContextItem(
            "rag",
            chunk.text,
            score,
            f"{chunk.doc_id} scale={chunk.scale} overlap={chunk.overlap_ratio} offset={chunk.token_start}",
            signal,
        )
        for chunk, score in results
        if chunk.text
    ]


def index_key(docs: Sequence[SourceDoc], grid: Grid, source_grids: Optional[Dict[str, Grid]], dimension: int) -> str:
    h = hashlib.sha256(f"v{INDEX_VERSION}|{grid}|{sorted((source_grids or {}).items())}|{dimension}".encode())
    for d in docs:
        h.update(f"\0{d.doc_id}\0{d.source}\0".encode())
        h.update(d.text.encode("utf-8"))
    return h.hexdigest()


def load_or_build(
    docs: Sequence[SourceDoc],
    cache_dir: Optional[Path],
    grid: Grid = Grid(),
    source_grids: Optional[Dict[str, Grid]] = None,
    force: bool = False,
    workers: int = 1,
) -> ChunkIndex:
    """Build the index, reusing a pickled copy keyed by a hash of inputs and config."""
    embedder = HashingEmbedder()
    if cache_dir is None:
        return build_index(docs, embedder, grid, source_grids, workers=workers)
    path = Path(cache_dir) / f"ssr-{index_key(docs, grid, source_grids, embedder.dimension)[:24]}.pkl"
    if path.exists() and not force:
        with path.open("rb") as fh:
            return pickle.load(fh)
    index = build_index(docs, embedder, grid, source_grids, workers=workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with tmp.open("wb") as fh:
        pickle.dump(index, fh, protocol=pickle.HIGHEST_PROTOCOL)
    tmp.replace(path)
    return index

"""Initial knowledge graph from specification text.

Chunk the document, ask the LLM for schema-typed entities and relationships
per chunk, then fold the extraction records into a graph.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .assets import read_asset, render
from .graph import Graph, KGEdge, KGNode, Schema
from .llm import LlmProvider, ProviderError
from .text import DEFAULT_TOKENIZER, Tokenizer, collapse_ws

logger = logging.getLogger(__name__)

TUPLE_DELIM = "<|>"
COMPLETION_DELIM = "<|COMPLETE|>"
PLACEHOLDER_TYPE = "Component"
SUMMARY_THRESHOLD_CHARS = 1024
DEFAULT_CHUNK_TOKENS = 1200
DEFAULT_OVERLAP_TOKENS = 100
PIECE_SEP = "; "


@dataclass
class SpecDocument:
    doc_id: str
    text: str
    source_path: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"specification {self.doc_id!r} is empty")


@dataclass
class TextChunk:
    chunk_id: str
    text: str
    token_start: int
    token_end: int
    char_start: int
    char_end: int


@dataclass
class ExtractionRecord:
    chunk_id: str
    entities: List[Tuple[str, str, str]] = field(default_factory=list)
    relations: List[Tuple[str, str, str, str, float]] = field(default_factory=list)
    dropped: int = 0
    skipped_lines: int = 0


def chunk_for_extraction(
    doc: SpecDocument,
    chunk_tokens: int = DEFAULT_CHUNK_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
    tokenizer: Tokenizer = DEFAULT_TOKENIZER,
) -> List[TextChunk]:
    """Fixed-size token windows advancing by ``chunk_tokens - overlap_tokens``.

    Each chunk's text runs from its first token to the start of the token after
    its last one (the final chunk runs to end of text), so trimming the overlap
    and concatenating gives back the original document.
    """
    if not chunk_tokens > overlap_tokens >= 0:
        raise ValueError("need chunk_tokens > overlap_tokens >= 0")
    spans = tokenizer.spans(doc.text)
    n = len(spans)
    if n == 0:
        return [TextChunk(f"{doc.doc_id}-0000", doc.text, 0, 0, 0, len(doc.text))]
    stride = chunk_tokens - overlap_tokens
    width = max(4, len(str((n - 1) // stride)))

    def char_at(tok: int) -> int:
        return spans[tok][0] if tok < n else len(doc.text)

    chunks = []
    for ordinal, start in enumerate(range(0, n, stride)):
        end = min(start + chunk_tokens, n)
        c0 = 0 if start == 0 else char_at(start)
        c1 = char_at(end)
        chunks.append(TextChunk(f"{doc.doc_id}-{ordinal:0{width}d}", doc.text[c0:c1], start, end, c0, c1))
    return chunks


def reconstruct(chunks: Sequence[TextChunk]) -> str:
    out = []
    covered = 0
    for c in chunks:
        if c.char_end > covered:
            out.append(c.text[max(0, covered - c.char_start):])
            covered = c.char_end
    return "".join(out)


def extraction_prompt(schema: Schema, chunk_text: str, template: Optional[str] = None) -> str:
    return render(
        template or read_asset("entity_extraction.txt"),
        entity_types=", ".join(sorted(schema.entity_types)),
        relation_types=", ".join(sorted(schema.relation_types)),
        tuple_delimiter=TUPLE_DELIM,
        completion_delimiter=COMPLETION_DELIM,
        input_text=chunk_text,
    )


_RECORD_RE = re.compile(r'^\(\s*"(entity|relationship)"\s*<\|>(.*)\)\s*$', re.S)


def parse_extraction(reply: str, schema: Schema, chunk_id: str) -> ExtractionRecord:
    rec = ExtractionRecord(chunk_id)
    for raw in re.split(r"\n|##", reply):
        line = raw.strip()
        if not line or line == COMPLETION_DELIM:
            continue
        line = line.replace(COMPLETION_DELIM, "").strip()
        m = _RECORD_RE.match(line)
        if not m:
            rec.skipped_lines += 1
            continue
        kind = m.group(1)
        fields = [f.strip().strip('"').strip() for f in m.group(2).split(TUPLE_DELIM)]
        if kind == "entity":
            if len(fields) < 2 or not fields[0]:
                rec.skipped_lines += 1
                continue
            etype = schema.canonical_entity(fields[1])
            if etype is None:
                rec.dropped += 1
                continue
            rec.entities.append((fields[0], etype, fields[2] if len(fields) > 2 else ""))
        else:
            if len(fields) < 3 or not fields[0] or not fields[1]:
                rec.skipped_lines += 1
                continue
            rtype = schema.canonical_relation(fields[2])
            if rtype is None:
                rec.dropped += 1
                continue
            desc = fields[3] if len(fields) > 3 else ""
            try:
                weight = float(fields[4]) if len(fields) > 4 and fields[4] else 1.0
            except ValueError:
                weight = 1.0
            rec.relations.append((fields[0], fields[1], rtype, desc, max(0.0, weight)))
    return rec


def extract_chunk(
    llm: LlmProvider, schema: Schema, chunk_text: str, chunk_id: str = "chunk-0000", template: Optional[str] = None
) -> ExtractionRecord:
    reply = llm.complete(extraction_prompt(schema, chunk_text, template))
    rec = parse_extraction(reply, schema, chunk_id)
    if not rec.entities and not rec.relations:
        logger.warning("chunk %s: no usable records in extraction reply", chunk_id)
    if rec.dropped:
        logger.info("chunk %s: dropped %d out-of-schema records", chunk_id, rec.dropped)
    return rec


def extract_all(
    llm: LlmProvider, schema: Schema, chunks: Sequence[TextChunk], workers: int = 1, template: Optional[str] = None
) -> List[ExtractionRecord]:
    def one(c: TextChunk) -> ExtractionRecord:
        return extract_chunk(llm, schema, c.text, c.chunk_id, template)

    if workers <= 1:
        return [one(c) for c in chunks]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, chunks))


def normalize_name(name: str) -> str:
    return collapse_ws(name).casefold()


def spec_node_id(name: str, entity_type: str) -> str:
    return f"spec:{entity_type}:{normalize_name(name)}"


def summarize_merged_description(llm: Optional[LlmProvider], name: str, pieces: Sequence[str]) -> str:
    if not pieces:
        raise ValueError("nothing to summarize")
    if len(pieces) == 1:
        return pieces[0]
    joined = PIECE_SEP.join(pieces)
    if llm is None or (getattr(llm, "is_mock", False) and not llm.scripted(_summary_prompt(name, pieces))):
        return joined
    try:
        reply = llm.complete(_summary_prompt(name, pieces)).strip()
    except ProviderError as exc:
        logger.warning("description summary for %s failed (%s); using concatenation", name, exc)
        return joined
    return reply or joined


def _summary_prompt(name: str, pieces: Sequence[str]) -> str:
    listing = "\n".join(f"- {p}" for p in pieces)
    return (
        "You are a helpful assistant responsible for generating a comprehensive summary of the data provided below.\n"
        f"Given the entity '{name}' and the following descriptions, all related to it, concatenate them into a "
        "single, comprehensive description in third person. Resolve contradictions and keep all distinct facts.\n\n"
        f"Descriptions:\n{listing}\n\nOutput:"
    )


def assemble_graph(
    records: Sequence[ExtractionRecord],
    schema: Optional[Schema] = None,
    llm: Optional[LlmProvider] = None,
    threshold_chars: int = SUMMARY_THRESHOLD_CHARS,
) -> Graph:
    """Fold extraction records into a graph.

    Records are processed in chunk-id order so the result does not depend on
    the order they arrive in.  Same-name entities of different types stay
    separate nodes.
    """
    g = Graph(schema)
    pieces: dict = {}
    names: dict = {}
    by_norm: dict = {}
    ordered = sorted(records, key=lambda r: r.chunk_id)

    for rec in ordered:
        for name, etype, desc in rec.entities:
            nid = spec_node_id(name, etype)
            if nid not in g.nodes:
                g.add_node(KGNode(nid, collapse_ws(name), etype, source_ids=[rec.chunk_id]))
                names[nid] = collapse_ws(name)
                by_norm.setdefault(normalize_name(name), []).append(nid)
            elif rec.chunk_id not in g.nodes[nid].source_ids:
                g.nodes[nid].source_ids.append(rec.chunk_id)
            if desc and desc not in pieces.setdefault(nid, []):
                pieces[nid].append(desc)

    edge_pieces: dict = {}
    for rec in ordered:
        for src, dst, rtype, desc, weight in rec.relations:
            ends = []
            for name in (src, dst):
                cands = by_norm.get(normalize_name(name))
                if cands:
                    ends.append(sorted(cands)[0])
                    continue
                nid = spec_node_id(name, PLACEHOLDER_TYPE)
                g.add_node(KGNode(nid, collapse_ws(name), PLACEHOLDER_TYPE, source_ids=[rec.chunk_id]))
                by_norm.setdefault(normalize_name(name), []).append(nid)
                ends.append(nid)
            key = (ends[0], ends[1], rtype)
            g.add_edge(KGEdge(ends[0], ends[1], rtype, weight, source_ids=[rec.chunk_id]))
            if desc and desc not in edge_pieces.setdefault(key, []):
                edge_pieces[key].append(desc)

    for nid, ps in pieces.items():
        g.nodes[nid].description = _finish(llm, names.get(nid, nid), ps, threshold_chars)
    for e in g.edges:
        ps = edge_pieces.get(e.key)
        if ps:
            e.description = _finish(llm, f"{e.src} -> {e.dst}", ps, threshold_chars)
    return g


def _finish(llm: Optional[LlmProvider], name: str, pieces: List[str], threshold: int) -> str:
    joined = PIECE_SEP.join(pieces)
    if len(joined) > threshold:
        return summarize_merged_description(llm, name, pieces)
    return joined

"""Typed, attributed multigraph shared by the specification and RTL stages.

Nodes carry a type drawn from the active schema (extended by the fixed RTL
kinds); edges are deduplicated on ``(src, dst, relation)``.  Shortest-path
helpers treat the graph as undirected with unit edge lengths.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

FORMAT_VERSION = 1
DESCRIPTION_SEP = " | "

RTL_NODE_TYPES = frozenset(
    {
        "module",
        "port",
        "signal",
        "register",
        "instance",
        "fsm",
        "control_flow",
        "assignment",
        "verification_point",
        "protocol_pattern",
        "root",
    }
)

RTL_RELATIONS = frozenset(
    {
        "contains",
        "instantiates",
        "connects_port",
        "drives",
        "controls",
        "has_fsm",
        "assigns_to",
        "uses_in_rhs",
        "links_to_spec",
        "root_connects",
    }
)


class GraphError(Exception):
    pass


class TypeConflictError(GraphError):
    pass


class MissingEndpointError(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"edge endpoint {node_id!r} is not in the graph")
        self.node_id = node_id


class SchemaViolationError(GraphError):
    pass


class GraphFormatError(GraphError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Schema:
    entity_types: frozenset
    relation_types: frozenset

    def __post_init__(self):
        if not self.entity_types or not self.relation_types:
            raise ValueError("schema needs at least one entity type and one relation type")

    @classmethod
    def from_lists(cls, entity_types: Iterable[str], relation_types: Iterable[str]) -> "Schema":
        ents, rels = list(entity_types), list(relation_types)
        for label, items in (("entity", ents), ("relation", rels)):
            if len(items) != len(set(items)):
                raise ValueError(f"duplicate {label} types in schema")
        return cls(frozenset(ents), frozenset(rels))

    def node_types(self) -> frozenset:
        return self.entity_types | RTL_NODE_TYPES

    def relations(self) -> frozenset:
        return self.relation_types | RTL_RELATIONS

    def canonical_entity(self, name: str) -> Optional[str]:
        """Schema spelling of ``name`` (case-insensitive), or None."""
        return _casefold_lookup(self.entity_types, name)

    def canonical_relation(self, name: str) -> Optional[str]:
        return _casefold_lookup(self.relation_types, name)


def _casefold_lookup(vocab: Iterable[str], name: str) -> Optional[str]:
    key = " ".join(name.split()).casefold()
    for item in vocab:
        if item.casefold() == key:
            return item
    return None


@dataclass
class KGNode:
    id: str
    name: str
    node_type: str
    description: str = ""
    source_ids: List[str] = field(default_factory=list)
    module: Optional[str] = None
    attrs: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "node_type": self.node_type,
            "description": self.description,
            "source_ids": list(self.source_ids),
            "module": self.module,
            "attrs": dict(sorted(self.attrs.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KGNode":
        return cls(
            id=d["id"],
            name=d["name"],
            node_type=d["node_type"],
            description=d.get("description", ""),
            source_ids=list(d.get("source_ids", [])),
            module=d.get("module"),
            attrs={str(k): str(v) for k, v in d.get("attrs", {}).items()},
        )


@dataclass
class KGEdge:
    src: str
    dst: str
    relation: str
    weight: float = 1.0
    description: str = ""
    source_ids: List[str] = field(default_factory=list)

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.src, self.dst, self.relation)

    def to_dict(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "relation": self.relation,
            "weight": self.weight,
            "description": self.description,
            "source_ids": list(self.source_ids),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KGEdge":
        return cls(
            src=d["src"],
            dst=d["dst"],
            relation=d["relation"],
            weight=float(d.get("weight", 1.0)),
            description=d.get("description", ""),
            source_ids=list(d.get("source_ids", [])),
        )


def _join_text(old: str, new: str) -> str:
    if not new or new == old or new in old.split(DESCRIPTION_SEP):
        return old
    return f"{old}{DESCRIPTION_SEP}{new}" if old else new


def _merge_ids(old: List[str], new: Iterable[str]) -> None:
    for sid in new:
        if sid not in old:
            old.append(sid)


class Graph:
    """Directed multigraph with an undirected neighbour index.

    Mutation is single-writer; once built, reads can be shared freely.
    """

    def __init__(self, schema: Optional[Schema] = None):
        self.schema = schema
        self.nodes: Dict[str, KGNode] = {}
        self.edges: List[KGEdge] = []
        self._edge_pos: Dict[Tuple[str, str, str], int] = {}
        self.adjacency: Dict[str, Set[str]] = {}
        self._degree: Dict[str, int] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.nodes == other.nodes and sorted_edges(self) == sorted_edges(other)

    def add_node(self, node: KGNode) -> "Graph":
        if self.schema is not None and node.node_type not in self.schema.node_types():
            raise SchemaViolationError(f"node type {node.node_type!r} is not in the schema")
        existing = self.nodes.get(node.id)
        if existing is None:
            self.nodes[node.id] = node
            self.adjacency[node.id] = set()
            self._degree[node.id] = 0
            return self
        if existing.node_type != node.node_type:
            raise TypeConflictError(
                f"node {node.id!r} already has type {existing.node_type!r}, got {node.node_type!r}"
            )
        existing.description = _join_text(existing.description, node.description)
        _merge_ids(existing.source_ids, node.source_ids)
        for k, v in node.attrs.items():
            existing.attrs.setdefault(k, v)
        if existing.module is None:
            existing.module = node.module
        return self

    def add_edge(self, edge: KGEdge) -> "Graph":
        for end in (edge.src, edge.dst):
            if end not in self.nodes:
                raise MissingEndpointError(end)
        if edge.weight < 0:
            raise ValueError("edge weight must be non-negative")
        if self.schema is not None and edge.relation not in self.schema.relations():
            raise SchemaViolationError(f"relation {edge.relation!r} is not in the schema")
        pos = self._edge_pos.get(edge.key)
        if pos is not None:
            old = self.edges[pos]
            old.description = _join_text(old.description, edge.description)
            _merge_ids(old.source_ids, edge.source_ids)
            return self
        self._edge_pos[edge.key] = len(self.edges)
        self.edges.append(edge)
        self._index_edge(edge)
        return self

    def _index_edge(self, edge: KGEdge) -> None:
        self._degree[edge.src] += 1
        self._degree[edge.dst] += 1
        if edge.src != edge.dst:
            self.adjacency[edge.src].add(edge.dst)
            self.adjacency[edge.dst].add(edge.src)

    def has_edge(self, src: str, dst: str, relation: str) -> bool:
        return (src, dst, relation) in self._edge_pos

    def edges_between(self, a: str, b: str) -> List[KGEdge]:
        """Edges joining ``a`` and ``b`` in either direction, in insertion order."""
        return [e for e in self.edges if (e.src, e.dst) in ((a, b), (b, a))]

    def neighbors(self, node_id: str) -> List[str]:
        return sorted(self.adjacency[node_id])

    def degree(self, node_id: str) -> int:
        return self._degree[node_id]

    def max_degree(self) -> int:
        return max(self._degree.values(), default=0)

    def rebuild_adjacency(self) -> None:
        self.adjacency = {nid: set() for nid in self.nodes}
        self._degree = {nid: 0 for nid in self.nodes}
        self._edge_pos = {}
        for i, e in enumerate(self.edges):
            self._edge_pos[e.key] = i
            self._index_edge(e)

    def copy(self) -> "Graph":
        return deserialize(serialize(self), schema=self.schema)


def sorted_edges(g: Graph) -> List[dict]:
    return sorted((e.to_dict() for e in g.edges), key=lambda d: (d["src"], d["dst"], d["relation"]))


def components(g: Graph) -> List[List[str]]:
    """Weakly connected components, each sorted, in order of smallest member id."""
    seen: Set[str] = set()
    comps = []
    for start in sorted(g.nodes):
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in g.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def ensure_connected(g: Graph, root_id: str = "root") -> Graph:
    comps = components(g)
    if len(comps) <= 1:
        return g
    rid = root_id
    n = 1
    while rid in g.nodes:
        rid = f"{root_id}_{n}"
        n += 1
    hubs = [min(comp, key=lambda nid: (-g.degree(nid), nid)) for comp in comps]
    g.add_node(KGNode(id=rid, name="root", node_type="root", description="connectivity root"))
    for hub in hubs:
        g.add_edge(KGEdge(rid, hub, "root_connects"))
    return g


def bfs_distances(g: Graph, source: str) -> Dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def next_hop_table(g: Graph, targets: Iterable[str]) -> Dict[Tuple[str, str], str]:
    """First step of a shortest path from every node toward each target.

    Ties between equally short routes go to the smallest neighbour id.
    """
    table: Dict[Tuple[str, str], str] = {}
    for t in sorted(set(targets)):
        if t not in g.nodes:
            raise KeyError(f"target {t!r} is not in the graph")
        dist = bfs_distances(g, t)
        for u, du in dist.items():
            if du == 0:
                continue
            table[(u, t)] = min(v for v in g.adjacency[u] if dist.get(v) == du - 1)
    return table


def serialize(g: Graph) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "nodes": [g.nodes[nid].to_dict() for nid in sorted(g.nodes)],
        "edges": [e.to_dict() for e in g.edges],
    }
    return (json.dumps(doc, indent=1, ensure_ascii=False) + "\n").encode("utf-8")


def deserialize(data: bytes, schema: Optional[Schema] = None) -> Graph:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GraphFormatError("invalid UTF-8", exc.start) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise GraphFormatError(exc.msg, offset) from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise GraphFormatError("missing or unsupported format_version", 0)
    g = Graph(schema)
    try:
        for nd in doc["nodes"]:
            g.add_node(KGNode.from_dict(nd))
        for ed in doc["edges"]:
            g.add_edge(KGEdge.from_dict(ed))
    except (KeyError, TypeError, GraphError) as exc:
        raise GraphFormatError(f"malformed graph document: {exc}", len(data)) from exc
    return g

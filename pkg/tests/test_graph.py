import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgsva.graph import (
    Graph,
    GraphFormatError,
    KGEdge,
    KGNode,
    MissingEndpointError,
    Schema,
    SchemaViolationError,
    TypeConflictError,
    components,
    deserialize,
    ensure_connected,
    next_hop_table,
    serialize,
)
from helpers import brute_bfs, connected_random_graph, random_graph


def line(*ids):
    g = Graph()
    for i in ids:
        g.add_node(KGNode(i, i, "signal", module="m"))
    return g


def test_add_node_base_case():
    g = Graph().add_node(KGNode("A", "A", "signal"))
    assert len(g) == 1 and g.edges == []


def test_add_node_merges_descriptions():
    g = Graph()
    g.add_node(KGNode("A", "A", "signal", "first", ["c0"]))
    g.add_node(KGNode("A", "A", "signal", "second", ["c1"]))
    assert len(g) == 1
    assert g.nodes["A"].description == "first | second"
    assert g.nodes["A"].source_ids == ["c0", "c1"]
    # merging the same text again is a no-op
    g.add_node(KGNode("A", "A", "signal", "first"))
    assert g.nodes["A"].description == "first | second"


def test_add_node_type_conflict():
    g = Graph().add_node(KGNode("A", "A", "signal"))
    with pytest.raises(TypeConflictError):
        g.add_node(KGNode("A", "A", "module"))


def test_schema_enforced():
    schema = Schema.from_lists(["Signal"], ["uses"])
    g = Graph(schema)
    g.add_node(KGNode("a", "a", "Signal"))
    g.add_node(KGNode("b", "b", "port", module="m"))  # RTL kinds always allowed
    with pytest.raises(SchemaViolationError):
        g.add_node(KGNode("c", "c", "Airplane"))
    g.add_edge(KGEdge("a", "b", "uses"))
    g.add_edge(KGEdge("a", "b", "drives"))
    with pytest.raises(SchemaViolationError):
        g.add_edge(KGEdge("a", "b", "fliesTo"))


def test_add_edge_dedup_and_parallel():
    g = line("A", "B")
    g.add_edge(KGEdge("A", "B", "contains", description="x"))
    g.add_edge(KGEdge("A", "B", "contains", description="y"))
    assert len(g.edges) == 1 and g.edges[0].description == "x | y"
    g.add_edge(KGEdge("A", "B", "drives"))
    assert len(g.edges) == 2


def test_add_edge_missing_endpoint_names_id():
    g = line("A")
    with pytest.raises(MissingEndpointError) as info:
        g.add_edge(KGEdge("A", "C", "drives"))
    assert "C" in str(info.value)


def test_negative_weight_rejected():
    g = line("A", "B")
    with pytest.raises(ValueError):
        g.add_edge(KGEdge("A", "B", "drives", -1.0))


def test_ensure_connected_cases():
    g = line("A", "B", "C")
    g.add_edge(KGEdge("A", "B", "drives")).add_edge(KGEdge("B", "C", "drives"))
    before = serialize(g)
    assert serialize(ensure_connected(g)) == before

    g = line("A", "B", "C", "D")
    g.add_edge(KGEdge("A", "B", "drives")).add_edge(KGEdge("C", "D", "drives"))
    g.add_edge(KGEdge("D", "C", "controls"))
    ensure_connected(g)
    assert len(g) == 5 and g.nodes["root"].node_type == "root"
    root_edges = [e for e in g.edges if e.relation == "root_connects"]
    assert [e.dst for e in root_edges] == ["A", "C"]  # highest degree per component (ties by id)
    assert len(components(g)) == 1

    empty = Graph()
    assert len(ensure_connected(empty)) == 0


def test_ensure_connected_avoids_id_clash():
    g = line("root", "x")
    ensure_connected(g)
    assert "root_1" in g.nodes


def test_next_hop_examples():
    g = line("A", "B", "C")
    g.add_edge(KGEdge("A", "B", "drives")).add_edge(KGEdge("B", "C", "drives"))
    t = next_hop_table(g, {"C"})
    assert t[("A", "C")] == "B" and t[("B", "C")] == "C"

    g = line("X", "L1", "L2")
    g.add_edge(KGEdge("X", "L1", "contains")).add_edge(KGEdge("X", "L2", "contains"))
    assert next_hop_table(g, {"L2"})[("L1", "L2")] == "X"

    g = line("A", "B", "C", "D")
    for a, b in (("A", "B"), ("B", "D"), ("A", "C"), ("C", "D")):
        g.add_edge(KGEdge(a, b, "drives"))
    assert next_hop_table(g, {"D"})[("A", "D")] == "B"


def test_next_hop_unreachable_absent():
    g = line("A", "B")
    assert next_hop_table(g, {"B"}) == {}


def test_roundtrip_empty_and_truncated():
    assert deserialize(serialize(Graph())) == Graph()
    data = serialize(line("A", "B"))
    with pytest.raises(GraphFormatError) as info:
        deserialize(data[: len(data) // 2])
    assert info.value.offset > 0
    with pytest.raises(GraphFormatError):
        deserialize(b'{"nodes": []}')
    with pytest.raises(GraphFormatError):
        deserialize(b"\xff\xfe")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_roundtrip_property(seed):
    g = random_graph(random.Random(seed), 30)
    data = serialize(g)
    h = deserialize(data)
    assert h == g
    assert serialize(h) == data


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjacency_rebuild_is_identity(seed):
    g = random_graph(random.Random(seed), 30)
    adj = {k: set(v) for k, v in g.adjacency.items()}
    deg = {n: g.degree(n) for n in g.nodes}
    g.rebuild_adjacency()
    assert g.adjacency == adj and {n: g.degree(n) for n in g.nodes} == deg
    keys = [e.key for e in g.edges]
    assert len(keys) == len(set(keys))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ensure_connected_idempotent(seed):
    g = ensure_connected(random_graph(random.Random(seed), 40, edge_factor=0.6))
    once = serialize(g)
    assert len(components(g)) <= 1
    assert serialize(ensure_connected(g)) == once


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_next_hop_decrements_distance(seed):
    rng = random.Random(seed)
    g = connected_random_graph(rng, 40)
    targets = rng.sample(sorted(g.nodes), min(4, len(g)))
    table = next_hop_table(g, targets)
    for t in targets:
        dist = brute_bfs(g, t)
        for u, du in dist.items():
            if u == t:
                assert (u, t) not in table
                continue
            hop = table[(u, t)]
            assert dist[hop] == du - 1
            # smallest id among all valid next hops
            best = min(v for v in g.adjacency[u] if dist.get(v) == du - 1)
            assert hop == best

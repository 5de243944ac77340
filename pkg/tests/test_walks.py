import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgsva.graph import Graph, KGEdge, KGNode, next_hop_table
from kgsva.walks import (
    ALL_SIGNALS_FOUND,
    BUDGET,
    DEAD_END,
    SIGNAL_REACHED,
    TRUNCATION_MARKER,
    TypeWeightTable,
    WalkConfig,
    WalkError,
    WalkPath,
    direction_score,
    importance,
    path_to_text,
    run_walks,
    transition_probs,
    walk,
    walk_rng,
)
from helpers import connected_random_graph
from walk_oracle import ref_probs


def star(k):
    g = Graph()
    g.add_node(KGNode("c", "hub", "signal", module="m"))
    for i in range(k):
        g.add_node(KGNode(f"l{i}", f"leaf{i}", "signal", module="m"))
        g.add_edge(KGEdge("c", f"l{i}", "drives"))
    return g


def test_importance_example():
    g = star(4)
    assert importance(g, "c", TypeWeightTable()) == pytest.approx(1.0)
    assert importance(g, "l0", TypeWeightTable()) == pytest.approx(0.4 * 0.25 + 0.6)
    assert importance(g, "l0", TypeWeightTable({"signal": 0.5})) == pytest.approx(0.1 + 0.3)


def test_direction_example():
    hops = {("A", "T1"): "B", ("A", "T2"): "C"}
    assert direction_score(hops, "A", "B", ["T1", "T2"]) == 0.5
    with pytest.raises(ValueError):
        direction_score(hops, "A", "B", [])


def test_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(0, 0, 0)
    with pytest.raises(ValueError):
        WalkConfig(alpha=-1)
    with pytest.raises(ValueError):
        WalkConfig(step_budget=0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_probs_against_oracle(seed):
    rng = random.Random(seed)
    g = connected_random_graph(rng, 30)
    ids = sorted(g.nodes)
    cur = rng.choice(ids)
    targets = sorted(rng.sample(ids, min(3, len(ids))))
    visited = set(rng.sample(ids, rng.randint(0, len(ids))))
    cfg = WalkConfig(rng.random(), rng.random(), rng.random() + 0.01)
    got = dict(transition_probs(g, cur, visited, next_hop_table(g, targets), targets, cfg))
    want = ref_probs(g, cur, visited, targets, cfg.alpha, cfg.beta, cfg.gamma)
    assert got.keys() == want.keys()
    if got:
        assert math.isclose(sum(got.values()), 1.0, abs_tol=1e-9)
    for c in got:
        assert got[c] == pytest.approx(want[c], abs=1e-12)


def test_uniform_fallback():
    g = star(3)
    cfg = WalkConfig(alpha=0, beta=1, gamma=0)
    probs = transition_probs(g, "c", {"c", "l0", "l1", "l2"}, {}, ["nowhere"], cfg)
    assert probs == [("l0", 1 / 3), ("l1", 1 / 3), ("l2", 1 / 3)]


def test_star_first_step_distribution():
    k = 5
    g = star(k)
    cfg = WalkConfig(walks_per_signal=1, step_budget=1)
    hops = next_hop_table(g, ["l2"])
    i_leaf = 0.4 * (1 / k) + 0.6
    raw = {f"l{i}": cfg.alpha * i_leaf + cfg.gamma + (cfg.beta if i == 2 else 0) for i in range(k)}
    total = sum(raw.values())
    n = 10_000
    counts = {c: 0 for c in raw}
    for s in range(n):
        p = walk(g, "c", ["l2"], hops, cfg, walk_rng(11, "c", s))
        counts[p.nodes[1]] += 1
    for c, r in raw.items():
        p = r / total
        sigma = math.sqrt(n * p * (1 - p))
        assert abs(counts[c] - n * p) <= 3 * sigma, (c, counts[c], n * p)


def line_graph(n):
    g = Graph()
    for i in range(n):
        g.add_node(KGNode(f"s{i}", f"s{i}", "signal", module="m"))
    for i in range(n - 1):
        g.add_edge(KGEdge(f"s{i}", f"s{i+1}", "drives"))
    return g


def test_termination_reasons():
    g = line_graph(3)
    hops = next_hop_table(g, ["s2"])
    p = walk(g, "s0", ["s2"], hops, WalkConfig(alpha=0, gamma=0), walk_rng(0, "s0", 0))
    assert p.nodes == ["s0", "s1", "s2"] and p.terminated_by == ALL_SIGNALS_FOUND
    assert p.discovered_signals == ["s2"]
    p = walk(g, "s0", ["s2", "s1"], next_hop_table(g, ["s1", "s2"]),
             WalkConfig(alpha=0, gamma=0, stop_at_first_signal=True), walk_rng(0, "s0", 0))
    assert p.terminated_by == SIGNAL_REACHED and p.nodes == ["s0", "s1"]
    p = walk(g, "s0", ["zz"], {}, WalkConfig(step_budget=4), walk_rng(0, "s0", 0))
    assert p.terminated_by == BUDGET and len(p.nodes) == 5
    lone = Graph().add_node(KGNode("x", "x", "signal"))
    assert walk(lone, "x", ["y"], {}, WalkConfig(), walk_rng(0, "x", 0)).terminated_by == DEAD_END
    with pytest.raises(WalkError):
        walk(lone, "nope", [], {}, WalkConfig(), walk_rng(0, "x", 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_walk_invariants(seed):
    rng = random.Random(seed)
    g = connected_random_graph(rng, 40)
    ids = sorted(g.nodes)
    start = rng.choice(ids)
    arch = rng.sample(ids, min(5, len(ids)))
    cfg = WalkConfig(walks_per_signal=3, step_budget=20, seed=seed)
    for p in run_walks(g, start, arch, cfg):
        assert p.nodes[0] == start and len(p.nodes) <= cfg.step_budget + 1
        assert len(p.edges) == len(p.nodes) - 1
        for a, b, e in zip(p.nodes, p.nodes[1:], p.edges):
            assert {e.src, e.dst} == {a, b}
        assert set(p.discovered_signals) <= set(arch) - {start}
        assert len(set(p.discovered_signals)) == len(p.discovered_signals)


def test_run_walks_deterministic():
    g = connected_random_graph(random.Random(4), 40)
    ids = sorted(g.nodes)
    cfg = WalkConfig(walks_per_signal=10, seed=3)
    a = [p.to_dict() for p in run_walks(g, ids[0], ids[1:6], cfg)]
    b = [p.to_dict() for p in run_walks(g, ids[0], ids[1:6], cfg)]
    assert a == b
    c = [p.to_dict() for p in run_walks(g, ids[0], ids[1:6], WalkConfig(walks_per_signal=10, seed=4))]
    assert c != a


def test_path_text_format_and_cap():
    g = line_graph(3)
    p = WalkPath(["s0", "s1", "s2"], [g.edges[0], g.edges[1]], ["s2"], ALL_SIGNALS_FOUND)
    text = path_to_text(g, p).render()
    assert text.splitlines()[0] == "GUIDED RANDOM WALK FROM s0 (signal)"
    assert "  s0 (signal in m) drives s1 (signal in m)" in text
    assert "  s1 (signal in m) drives s2 (signal in m)" in text
    assert text.index("s0 (signal in m) drives") < text.index("s1 (signal in m) drives")

    g = line_graph(80)
    nodes = [f"s{i}" for i in range(80)]
    p = WalkPath(nodes, list(g.edges), [], BUDGET)
    pt = path_to_text(g, p)
    assert pt.truncated and len(pt.lines) == 60
    assert pt.render().endswith(TRUNCATION_MARKER)

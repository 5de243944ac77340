"""Shared builders for the test suite."""

from __future__ import annotations

import random
from collections import deque
from pathlib import Path
from typing import Dict

from kgsva.graph import Graph, KGEdge, KGNode

UART_DIR = Path(__file__).resolve().parents[1] / "src" / "kgsva" / "fixtures" / "uart"
UART_RTL = [UART_DIR / n for n in ("baud_gen.v", "uart_tx.v", "uart_rx.v", "uart_top.v")]
DATA_DIR = Path(__file__).resolve().parent / "data"

NODE_TYPES = ["module", "port", "signal", "register", "fsm", "Signal", "Clock"]
RELATIONS = ["contains", "drives", "connects_port", "uses_in_rhs", "controls"]


def random_graph(rng: random.Random, max_nodes: int = 50, edge_factor: float = 1.5) -> Graph:
    """Random typed graph with up to ``max_nodes`` nodes; may be disconnected."""
    g = Graph()
    n = rng.randint(1, max_nodes)
    for i in range(n):
        g.add_node(
            KGNode(
                f"n{i:03d}",
                f"sig_{i}",
                rng.choice(NODE_TYPES),
                description=rng.choice(["", "a node", "ünïcode ✓"]),
                source_ids=[f"chunk-{rng.randint(0, 3)}"],
                module=rng.choice([None, "top", "sub"]),
                attrs={"width": str(rng.randint(1, 32))} if rng.random() < 0.5 else {},
            )
        )
    ids = sorted(g.nodes)
    for _ in range(int(n * edge_factor * rng.random())):
        a, b = rng.choice(ids), rng.choice(ids)
        g.add_edge(KGEdge(a, b, rng.choice(RELATIONS), round(rng.random() * 2, 3)))
    return g


def connected_random_graph(rng: random.Random, max_nodes: int = 50) -> Graph:
    g = random_graph(rng, max_nodes)
    ids = sorted(g.nodes)
    for a, b in zip(ids, ids[1:]):
        if rng.random() < 0.7 or not g.adjacency[a]:
            g.add_edge(KGEdge(a, b, "drives"))
    from kgsva.graph import ensure_connected

    return ensure_connected(g)


def brute_bfs(g: Graph, src: str) -> Dict[str, int]:
    """Independent BFS over the edge list (ignores the adjacency index)."""
    nbrs: Dict[str, set] = {n: set() for n in g.nodes}
    for e in g.edges:
        if e.src != e.dst:
            nbrs[e.src].add(e.dst)
            nbrs[e.dst].add(e.src)
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in nbrs[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist

"""Guided random walks with adaptive sampling over the unified graph.

A walk starts at a target signal's node and repeatedly samples a neighbour
with probability proportional to ``alpha*I + beta*D + gamma*N``: structural
importance, direction toward the still-undiscovered architectural signals,
and novelty within the current walk.
"""

from __future__ import annotations

import bisect
import hashlib
import logging
import random
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .graph import Graph, KGEdge, next_hop_table

logger = logging.getLogger(__name__)

NextHops = Mapping[Tuple[str, str], str]

SIGNAL_REACHED = "signal_reached"
BUDGET = "budget"
DEAD_END = "dead_end"
ALL_SIGNALS_FOUND = "all_signals_found"

DEFAULT_VERBS = {
    "drives": "drives",
    "contains": "contains",
    "connects_port": "connected to",
    "assigns_to": "assigns to",
    "uses_in_rhs": "used in",
    "has_fsm": "part of",
    "links_to_spec": "described in",
}
DISPLAY_CAP = 60
TRUNCATION_MARKER = "  ... [truncated]"


class WalkError(Exception):
    pass


@dataclass(frozen=True)
class WalkConfig:
    alpha: float = 0.3
    beta: float = 0.5
    gamma: float = 0.2
    walks_per_signal: int = 70
    step_budget: int = 100
    seed: int = 0
    # stop at the first discovered signal instead of hunting for all of them
    stop_at_first_signal: bool = False

    def __post_init__(self):
        weights = (self.alpha, self.beta, self.gamma)
        if min(weights) < 0 or not any(weights):
            raise ValueError("alpha, beta, gamma must be non-negative and not all zero")
        if self.walks_per_signal < 1 or self.step_budget < 1:
            raise ValueError("walks_per_signal and step_budget must be at least 1")


@dataclass
class TypeWeightTable:
    """T(n): semantic weight per node type, uniform 1.0 unless overridden."""

    weights: Dict[str, float] = field(default_factory=dict)
    default: float = 1.0

    def __call__(self, node_type: str) -> float:
        return self.weights.get(node_type, self.default)


@dataclass
class WalkPath:
    nodes: List[str]
    edges: List[KGEdge]
    discovered_signals: List[str]
    terminated_by: str

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": [[e.src, e.dst, e.relation] for e in self.edges],
            "discovered_signals": self.discovered_signals,
            "terminated_by": self.terminated_by,
        }


@dataclass
class PathText:
    header: str
    lines: List[str]
    truncated: bool = False

    def render(self) -> str:
        body = self.lines + ([TRUNCATION_MARKER] if self.truncated else [])
        return "\n".join([self.header, *body]) if body else self.header


def importance(g: Graph, n: str, tw: TypeWeightTable, max_degree: Optional[int] = None) -> float:
    md = g.max_degree() if max_degree is None else max_degree
    deg_term = g.degree(n) / md if md > 0 else 0.0
    return 0.4 * deg_term + 0.6 * tw(g.nodes[n].node_type)


def direction_score(next_hops: NextHops, current: str, c: str, targets: Iterable[str]) -> float:
    targets = list(targets)
    if not targets:
        raise ValueError("direction score needs at least one target signal")
    return sum(next_hops.get((current, t)) == c for t in targets) / len(targets)


def novelty(c: str, visited: Set[str]) -> float:
    return 0.0 if c in visited else 1.0


def transition_probs(
    g: Graph,
    current: str,
    visited: Set[str],
    next_hops: NextHops,
    targets: Iterable[str],
    cfg: WalkConfig,
    tw: Optional[TypeWeightTable] = None,
    max_degree: Optional[int] = None,
) -> List[Tuple[str, float]]:
    """Normalised P(c) over the (undirected) neighbours of ``current``.

    Falls back to uniform when every raw score is zero.
    """
    tw = tw or TypeWeightTable()
    candidates = g.neighbors(current)
    if not candidates:
        return []
    targets = list(targets)
    md = g.max_degree() if max_degree is None else max_degree
    raw = []
    for c in candidates:
        d = direction_score(next_hops, current, c, targets) if targets else 0.0
        raw.append(cfg.alpha * importance(g, c, tw, md) + cfg.beta * d + cfg.gamma * novelty(c, visited))
    total = sum(raw)
    if total <= 0:
        return [(c, 1.0 / len(candidates)) for c in candidates]
    return [(c, r / total) for c, r in zip(candidates, raw)]


def _sample(rng: random.Random, probs: Sequence[Tuple[str, float]]) -> str:
    cum = list(accumulate(p for _, p in probs))
    i = bisect.bisect_right(cum, rng.random() * cum[-1])
    return probs[min(i, len(probs) - 1)][0]


class _EdgeIndex:
    """Unordered node pair -> the edge a walk reports when stepping between them."""

    def __init__(self, g: Graph):
        self.pick: Dict[Tuple[str, str], KGEdge] = {}
        for e in g.edges:
            key = (min(e.src, e.dst), max(e.src, e.dst))
            old = self.pick.get(key)
            if old is None or (e.relation, e.src) < (old.relation, old.src):
                self.pick[key] = e

    def between(self, a: str, b: str) -> KGEdge:
        return self.pick[(min(a, b), max(a, b))]


def walk(
    g: Graph,
    start: str,
    arch_signals: Iterable[str],
    next_hops: NextHops,
    cfg: WalkConfig,
    rng: random.Random,
    tw: Optional[TypeWeightTable] = None,
    _edges: Optional[_EdgeIndex] = None,
) -> WalkPath:
    if start not in g.nodes:
        raise WalkError(f"start node {start!r} is not in the graph")
    tw = tw or TypeWeightTable()
    edges = _edges or _EdgeIndex(g)
    md = g.max_degree()
    remaining = set(arch_signals) - {start}
    visited = {start}
    nodes, path_edges, discovered = [start], [], []
    current = start
    terminated = BUDGET
    for _ in range(cfg.step_budget):
        if not remaining:
            terminated = ALL_SIGNALS_FOUND
            break
        probs = transition_probs(g, current, visited, next_hops, sorted(remaining), cfg, tw, md)
        if not probs:
            terminated = DEAD_END
            break
        nxt = _sample(rng, probs)
        path_edges.append(edges.between(current, nxt))
        nodes.append(nxt)
        visited.add(nxt)
        current = nxt
        if nxt in remaining:
            remaining.discard(nxt)
            discovered.append(nxt)
            if cfg.stop_at_first_signal:
                terminated = SIGNAL_REACHED
                break
    else:
        if not remaining:
            terminated = ALL_SIGNALS_FOUND
    return WalkPath(nodes, path_edges, discovered, terminated)


def walk_rng(seed: int, signal: str, ordinal: int) -> random.Random:
    digest = hashlib.blake2b(f"{seed}|{signal}|{ordinal}".encode("utf-8"), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "little"))


def run_walks(
    g: Graph,
    signal: str,
    arch_signals: Iterable[str],
    cfg: WalkConfig,
    next_hops: Optional[NextHops] = None,
    tw: Optional[TypeWeightTable] = None,
) -> List[WalkPath]:
    """``cfg.walks_per_signal`` walks from node ``signal``, each with its own derived RNG stream."""
    arch = sorted(set(arch_signals))
    hops = next_hops if next_hops is not None else next_hop_table(g, arch)
    edges = _EdgeIndex(g)
    return [
        walk(g, signal, arch, hops, cfg, walk_rng(cfg.seed, signal, k), tw, edges)
        for k in range(cfg.walks_per_signal)
    ]


def _describe(g: Graph, nid: str) -> str:
    n = g.nodes[nid]
    where = f"{n.node_type} in {n.module}" if n.module else n.node_type
    return f"{n.name} ({where})"


def path_to_text(
    g: Graph, p: WalkPath, cap: int = DISPLAY_CAP, verbs: Optional[Mapping[str, str]] = None
) -> PathText:
    """Render a walk in traversal order, one line per step."""
    verbs = DEFAULT_VERBS if verbs is None else verbs
    start = g.nodes[p.nodes[0]]
    header = "\n".join(
        [
            f"GUIDED RANDOM WALK FROM {start.name} ({start.node_type})",
            f"Located in module: {start.module or start.name}",
            f"Path length: {len(p.nodes)} nodes, discovered signals: ",
            ", ".join(g.nodes[s].name for s in p.discovered_signals),
            "",
            "Signal flow path:",
        ]
    )
    lines = []
    for a, b, e in zip(p.nodes, p.nodes[1:], p.edges):
        verb = verbs.get(e.relation, e.relation)
        lines.append(f"  {_describe(g, a)} {verb} {_describe(g, b)}")
    if len(lines) > cap:
        return PathText(header, lines[:cap], True)
    return PathText(header, lines)

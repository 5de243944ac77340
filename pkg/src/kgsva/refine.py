"""Fuse parsed RTL facts into the specification graph and cross-link names."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

from .graph import RTL_NODE_TYPES, Graph, KGEdge, KGNode, ensure_connected
from .matching import MIN_SCORE, AbbrevDict, MatchResult, match_score
from .rtl.analysis import resolve_formal, dataflow_edges, expr_signals
from .rtl.model import RtlDesign

logger = logging.getLogger(__name__)

SIGNAL_LIKE_SPEC_TYPES = ("Signal", "Port", "Register", "Clock", "Pin")
RTL_SIGNAL_TYPES = ("port", "signal", "register")


def module_id(name: str) -> str:
    return f"rtl:module:{name}"


def signal_id(module: str, name: str) -> str:
    return f"rtl:{module}:sig:{name}"


def _width_attrs(width: Optional[int]) -> Dict[str, str]:
    return {"width": str(width) if width is not None else "unknown"}


class _Builder:
    def __init__(self, g: Graph, design: RtlDesign):
        self.g = g
        self.design = design

    def node(self, nid: str, name: str, ntype: str, module: Optional[str], span: str = "", **attrs: str) -> str:
        self.g.add_node(
            KGNode(nid, name, ntype, source_ids=[span] if span else [], module=module, attrs=dict(attrs))
        )
        return nid

    def edge(self, src: str, dst: str, relation: str, span: str = "", description: str = "") -> None:
        self.g.add_edge(KGEdge(src, dst, relation, 1.0, description, [span] if span else []))

    def sig(self, module: str, name: str) -> str:
        nid = signal_id(module, name)
        if nid not in self.g.nodes:
            self.node(nid, name, "signal", module, signal_kind="wire", implicit="true", width="1")
            self.edge(module_id(module), nid, "contains")
        return nid

    def build(self) -> None:
        for mname in sorted(self.design.modules):
            m = self.design.modules[mname]
            loc = f"{m.file}:{m.line}"
            self.node(module_id(mname), mname, "module", None, loc, file=m.file)
        for ext in sorted(self.design.external_modules):
            self.node(module_id(ext), ext, "module", None, external="true")

        for mname in sorted(self.design.modules):
            m = self.design.modules[mname]
            mid = module_id(mname)
            for p in m.ports:
                nid = self.node(
                    signal_id(mname, p.name), p.name, "port", mname, f"{m.file}:{m.line}",
                    direction=p.direction, signal_kind=p.kind, **_width_attrs(p.width),
                )
                self.edge(mid, nid, "contains")
            for s in m.internal_signals:
                ntype = "register" if s.kind in ("reg", "integer") else "signal"
                attrs = dict(signal_kind=s.kind, **_width_attrs(s.width))
                if s.implicit:
                    attrs["implicit"] = "true"
                nid = self.node(signal_id(mname, s.name), s.name, ntype, mname, **attrs)
                self.edge(mid, nid, "contains")

        # relations only after every module's declarations exist
        for mname in sorted(self.design.modules):
            m = self.design.modules[mname]
            mid = module_id(mname)
            for inst in m.instances:
                iid = self.node(
                    f"rtl:{mname}:inst:{inst.instance_name}", inst.instance_name, "instance", mname,
                    inst.source_span, module_name=inst.module_name,
                )
                self.edge(mid, iid, "contains", inst.source_span)
                self.edge(iid, module_id(inst.module_name), "instantiates", inst.source_span)
                sub = self.design.modules.get(inst.module_name)
                for formal, actual in inst.port_connections.items():
                    if sub is None:
                        continue
                    port = resolve_formal(sub, formal)
                    if port is None:
                        continue
                    for a in expr_signals(actual, m.params):
                        self.edge(self.sig(mname, a), signal_id(sub.name, port.name), "connects_port", inst.source_span,
                                  f"{inst.instance_name}.{port.name}")
            for fsm in m.fsms:
                fid = self.node(
                    f"rtl:{mname}:fsm:{fsm.state_signal}", f"{fsm.state_signal}_fsm", "fsm", mname,
                    fsm.source_span, state_signal=fsm.state_signal, clock=fsm.clock_signal, detection=fsm.detection,
                )
                self.edge(fid, mid, "has_fsm", fsm.source_span)
                self.edge(fid, self.sig(mname, fsm.state_signal), "contains", fsm.source_span)
            for k, cf in enumerate(m.control_flows):
                cid = self.node(
                    f"rtl:{mname}:cf:{k}", f"{cf.kind}_{k}", "control_flow", mname, cf.source_span,
                    kind=cf.kind, condition=",".join(cf.condition_signals),
                )
                self.edge(mid, cid, "contains", cf.source_span)
                for c in cf.condition_signals:
                    self.edge(self.sig(mname, c), cid, "controls", cf.source_span)
                for lhs in cf.governed_lhs:
                    self.edge(cid, self.sig(mname, lhs), "controls", cf.source_span)
            for k, a in enumerate(m.assignments):
                aid = self.node(
                    f"rtl:{mname}:assign:{k}", f"{a.lhs}_assignment", "assignment", mname, a.source_span,
                    kind="continuous" if a.continuous else ("blocking" if a.blocking else "nonblocking"),
                )
                self.edge(mid, aid, "contains", a.source_span)
                self.edge(aid, self.sig(mname, a.lhs), "assigns_to", a.source_span)
                for r in a.rhs_signals:
                    self.edge(aid, self.sig(mname, r), "uses_in_rhs", a.source_span)

        for fe in dataflow_edges(self.design):
            self.edge(self.sig(fe.src_module, fe.src), self.sig(fe.dst_module, fe.dst), "drives")


def refine(g0: Graph, design: RtlDesign, abbrevs: Optional[AbbrevDict] = None) -> Tuple[Graph, List[MatchResult], List[dict]]:
    """Return the unified graph, emitted links and the full candidate audit."""
    g = g0.copy()
    _Builder(g, design).build()
    matches, audit = link_spec_to_rtl(g, abbrevs or AbbrevDict.load(), prefer_module=design.top)
    ensure_connected(g)
    return g, matches, audit


def link_spec_to_rtl(
    g: Graph, abbrevs: AbbrevDict, prefer_module: Optional[str] = None
) -> Tuple[List[MatchResult], List[dict]]:
    """Link each signal-like spec node to its best RTL signal.

    Score ties go to the lexicographically smallest RTL name; when several
    modules declare that same name, ``prefer_module`` (usually the top) wins.
    """
    rtl_nodes = sorted(
        (n for n in g.nodes.values() if n.node_type in RTL_SIGNAL_TYPES and n.attrs.get("implicit") != "true"),
        key=lambda n: (n.name, n.module != prefer_module, n.id),
    )
    spec_nodes = sorted(
        (n for n in g.nodes.values() if n.node_type in SIGNAL_LIKE_SPEC_TYPES and n.node_type not in RTL_NODE_TYPES),
        key=lambda n: n.id,
    )
    matches: List[MatchResult] = []
    audit: List[dict] = []
    for sn in spec_nodes:
        best: Optional[MatchResult] = None
        best_rejected = 0.0
        for rn in rtl_nodes:
            score, method = match_score(sn.name, rn.name, abbrevs)
            if score <= 0:
                continue
            audit.append({"spec_node": sn.id, "rtl_node": rn.id, "score": score, "method": method, "kept": False})
            if score < MIN_SCORE:
                best_rejected = max(best_rejected, score)
            elif best is None or score > best.score:
                best = MatchResult(sn.id, rn.id, score, method)
        if best is None:
            logger.warning("spec node %r has no RTL match (best score %.2f)", sn.name, best_rejected)
            continue
        for row in audit:
            if row["spec_node"] == sn.id and row["rtl_node"] == best.rtl_node:
                row["kept"] = True
        matches.append(best)
        g.add_edge(KGEdge(best.rtl_node, sn.id, "links_to_spec", best.score, f"{best.method} match"))
    return matches, audit

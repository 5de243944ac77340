"""Design-level RTL analysis: include inlining, FSM detection, dataflow, valid signals."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set

from ..graph import RTL_NODE_TYPES, Graph
from .model import AssignmentFact, FsmFact, ModuleFact, RtlDesign
from .parser import KEYWORDS, parse_rtl

logger = logging.getLogger(__name__)

_INCLUDE_RE = re.compile(r'^[ \t]*`include[ \t]+"([^"]+)"[^\n]*$', re.M)
FSM_NAME_SUBSTRINGS = ("state", "fsm")
FSM_NAME_PREFIXES = ("st_", "current", "next_")


class IncludeError(Exception):
    pass


class MissingIncludeError(IncludeError):
    def __init__(self, target: str, including: Path):
        super().__init__(f"{including}: cannot resolve `include \"{target}\"")
        self.target = target
        self.including = including


class IncludeCycleError(IncludeError):
    def __init__(self, cycle: Sequence[Path]):
        super().__init__("include cycle: " + " -> ".join(str(p) for p in cycle))
        self.cycle = list(cycle)


class UnknownTopError(Exception):
    pass


def preprocess_includes(entry_files: Iterable[Path], include_dirs: Sequence[Path] = ()) -> Dict[str, str]:
    """Inline `include targets recursively; returns entry path -> expanded text."""
    out: Dict[str, str] = {}
    for entry in entry_files:
        entry = Path(entry)
        out[str(entry)] = _expand(entry, [p.resolve() for p in map(Path, include_dirs)], [])
    return out


def _expand(path: Path, include_dirs: List[Path], stack: List[Path]) -> str:
    real = path.resolve()
    if real in stack:
        raise IncludeCycleError(stack[stack.index(real):] + [real])
    text = path.read_text(encoding="utf-8", errors="replace")
    stack = stack + [real]

    def substitute(m: re.Match) -> str:
        target = m.group(1)
        for base in [path.parent] + include_dirs:
            cand = base / target
            if cand.is_file():
                return _expand(cand, include_dirs, stack)
        raise MissingIncludeError(target, path)

    return _INCLUDE_RE.sub(substitute, text)


def detect_fsms(m: ModuleFact) -> List[FsmFact]:
    """Clocked-case and name-pattern FSM detection, merged per state signal."""
    found: Dict[str, FsmFact] = {}
    for blk in m.always_blocks:
        if not blk.edges:
            continue
        clock = blk.edges[0][1]
        for subject, span in blk.case_subjects:
            if subject not in found:
                found[subject] = FsmFact(subject, clock, m.name, "clocked_case", span)
    for name in m.declared_names():
        if not _fsm_like(name):
            continue
        if name in found:
            found[name].detection = "both"
        else:
            found[name] = FsmFact(name, _clock_for(m, name), m.name, "name_pattern")
    return list(found.values())


def _fsm_like(name: str) -> bool:
    low = name.lower()
    return any(s in low for s in FSM_NAME_SUBSTRINGS) or low.startswith(FSM_NAME_PREFIXES)


def _clock_for(m: ModuleFact, signal: str) -> str:
    for blk in m.always_blocks:
        if blk.edges and signal in blk.assigned:
            return blk.edges[0][1]
    return ""


def extract_assignments(m: ModuleFact) -> List[AssignmentFact]:
    return list(m.assignments)


@dataclass(frozen=True, order=True)
class FlowEdge:
    src_module: str
    src: str
    dst_module: str
    dst: str

    @property
    def in_module(self) -> str:
        return self.dst_module


_IDENT_RE = re.compile(r"(?<![\w.$'])([A-Za-z_][A-Za-z0-9_$]*)(?!\s*\()")


def expr_signals(expr: str, params: Iterable[str] = ()) -> List[str]:
    skip = set(params)
    out: List[str] = []
    for name in _IDENT_RE.findall(re.sub(r"\d*'[sS]?[bBoOdDhH][0-9a-fA-FxXzZ?_]+", " ", expr)):
        if name not in KEYWORDS and name not in skip and name not in out:
            out.append(name)
    return out


def dataflow_edges(design: RtlDesign) -> List[FlowEdge]:
    """Driver -> driven pairs from assignments and instance port bindings (no closure)."""
    edges: Set[FlowEdge] = set()
    for mname, m in design.modules.items():
        for a in m.assignments:
            for r in a.rhs_signals:
                edges.add(FlowEdge(mname, r, mname, a.lhs))
        for inst in m.instances:
            sub = design.modules.get(inst.module_name)
            if sub is None:
                continue
            for formal, actual in inst.port_connections.items():
                port = resolve_formal(sub, formal)
                if port is None:
                    continue
                for sig in expr_signals(actual, m.params):
                    if port.direction in ("input", "inout"):
                        edges.add(FlowEdge(mname, sig, sub.name, port.name))
                    if port.direction in ("output", "inout"):
                        edges.add(FlowEdge(sub.name, port.name, mname, sig))
    return sorted(edges)


def resolve_formal(sub: ModuleFact, formal: str):
    if formal.startswith("#"):
        idx = int(formal[1:])
        return sub.ports[idx] if idx < len(sub.ports) else None
    return sub.port(formal)


def build_design(
    files: Sequence[Path],
    include_dirs: Sequence[Path] = (),
    top: Optional[str] = None,
    warnings: Optional[List[str]] = None,
) -> RtlDesign:
    sink = warnings if warnings is not None else []
    texts = preprocess_includes(files, include_dirs)
    design = RtlDesign(files=[str(f) for f in files])
    for path, text in texts.items():
        for m in parse_rtl(text, path, sink):
            if m.name in design.modules:
                msg = f"{path}: module {m.name!r} already defined in {design.modules[m.name].file}; keeping the first"
                sink.append(msg)
                logger.warning(msg)
                continue
            design.modules[m.name] = m
    for m in design.modules.values():
        m.fsms = detect_fsms(m)
        for inst in m.instances:
            if inst.module_name not in design.modules and inst.module_name not in design.external_modules:
                design.external_modules.append(inst.module_name)
    design.top = top or infer_top(design)
    if top is not None and top not in design.modules:
        raise UnknownTopError(f"top module {top!r} not found")
    return design


def infer_top(design: RtlDesign) -> Optional[str]:
    used = {i.module_name for m in design.modules.values() for i in m.instances}
    roots = sorted(n for n in design.modules if n not in used)
    if len(roots) == 1:
        return roots[0]
    if roots:
        # prefer the root with the most instances below it
        return max(roots, key=lambda n: (len(design.modules[n].instances), n))
    return None


def extract_valid_signals(design: RtlDesign, top: Optional[str] = None, graph: Optional[Graph] = None) -> Set[str]:
    """Top-module ports, plus top-level registers whose name a spec node uses verbatim."""
    top = top or design.top
    if top is None or top not in design.modules:
        raise UnknownTopError(f"top module {top!r} not found")
    m = design.modules[top]
    signals = {p.name for p in m.ports}
    if not signals:
        logger.warning("top module %s has no ports; no architectural signals", top)
    if graph is not None:
        spec_names = {n.name for n in graph.nodes.values() if n.node_type not in RTL_NODE_TYPES}
        for s in m.internal_signals:
            if s.kind in ("reg", "integer") and not s.implicit and s.name in spec_names:
                signals.add(s.name)
    return signals

"""Facts extracted from Verilog sources."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass
class PortDecl:
    name: str
    direction: str  # input | output | inout
    msb: Optional[int] = None
    lsb: Optional[int] = None
    kind: str = "unspecified"  # wire | reg | unspecified
    ranged: bool = False

    @property
    def width(self) -> Optional[int]:
        if not self.ranged:
            return 1
        if self.msb is None or self.lsb is None:
            return None
        return abs(self.msb - self.lsb) + 1


@dataclass
class SignalDecl:
    name: str
    kind: str  # wire | reg | integer
    msb: Optional[int] = None
    lsb: Optional[int] = None
    ranged: bool = False
    implicit: bool = False

    @property
    def width(self) -> Optional[int]:
        if not self.ranged:
            return 32 if self.kind == "integer" else 1
        if self.msb is None or self.lsb is None:
            return None
        return abs(self.msb - self.lsb) + 1


@dataclass
class AssignmentFact:
    lhs: str
    rhs_signals: List[str]
    blocking: bool
    continuous: bool
    in_module: str
    source_span: str


@dataclass
class ControlFlowFact:
    kind: str  # if_else | case | loop
    condition_signals: List[str]
    governed_lhs: List[str]
    in_module: str
    source_span: str = ""


@dataclass
class FsmFact:
    state_signal: str
    clock_signal: str
    in_module: str
    detection: str  # clocked_case | name_pattern | both
    source_span: str = ""


@dataclass
class AlwaysBlock:
    source_span: str
    edges: List[Tuple[str, str]]  # (posedge|negedge, signal)
    star: bool
    case_subjects: List[Tuple[str, str]]  # (subject signal, span)
    assigned: List[str]


@dataclass
class InstanceFact:
    instance_name: str
    module_name: str
    port_connections: Dict[str, str]  # formal (or "#<pos>") -> actual expression text
    source_span: str = ""


@dataclass
class ModuleFact:
    name: str
    file: str = ""
    line: int = 0
    params: Dict[str, Optional[int]] = field(default_factory=dict)
    ports: List[PortDecl] = field(default_factory=list)
    internal_signals: List[SignalDecl] = field(default_factory=list)
    instances: List[InstanceFact] = field(default_factory=list)
    assignments: List[AssignmentFact] = field(default_factory=list)
    control_flows: List[ControlFlowFact] = field(default_factory=list)
    always_blocks: List[AlwaysBlock] = field(default_factory=list)
    fsms: List[FsmFact] = field(default_factory=list)

    def port(self, name: str) -> Optional[PortDecl]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def signal(self, name: str) -> Optional[SignalDecl]:
        for s in self.internal_signals:
            if s.name == name:
                return s
        return None

    def declared_names(self) -> List[str]:
        return [p.name for p in self.ports] + [s.name for s in self.internal_signals]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RtlDesign:
    modules: Dict[str, ModuleFact] = field(default_factory=dict)
    top: Optional[str] = None
    files: List[str] = field(default_factory=list)
    external_modules: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "top": self.top,
            "files": list(self.files),
            "external_modules": sorted(self.external_modules),
            "modules": {name: self.modules[name].to_dict() for name in sorted(self.modules)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RtlDesign":
        design = cls(top=d.get("top"), files=list(d.get("files", [])), external_modules=list(d.get("external_modules", [])))
        for name, md in d.get("modules", {}).items():
            design.modules[name] = ModuleFact(
                name=md["name"],
                file=md.get("file", ""),
                line=md.get("line", 0),
                params=dict(md.get("params", {})),
                ports=[PortDecl(**p) for p in md.get("ports", [])],
                internal_signals=[SignalDecl(**s) for s in md.get("internal_signals", [])],
                instances=[InstanceFact(**i) for i in md.get("instances", [])],
                assignments=[AssignmentFact(**a) for a in md.get("assignments", [])],
                control_flows=[ControlFlowFact(**c) for c in md.get("control_flows", [])],
                always_blocks=[
                    AlwaysBlock(
                        source_span=b["source_span"],
                        edges=[tuple(e) for e in b["edges"]],
                        star=b["star"],
                        case_subjects=[tuple(c) for c in b["case_subjects"]],
                        assigned=list(b["assigned"]),
                    )
                    for b in md.get("always_blocks", [])
                ],
                fsms=[FsmFact(**f) for f in md.get("fsms", [])],
            )
        return design

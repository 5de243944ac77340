from .analysis import (
    FlowEdge,
    IncludeCycleError,
    MissingIncludeError,
    UnknownTopError,
    build_design,
    dataflow_edges,
    detect_fsms,
    extract_assignments,
    extract_valid_signals,
    preprocess_includes,
)
from .model import (
    AlwaysBlock,
    AssignmentFact,
    ControlFlowFact,
    FsmFact,
    InstanceFact,
    ModuleFact,
    PortDecl,
    RtlDesign,
    SignalDecl,
)
from .parser import RtlParseError, parse_rtl

__all__ = [
    "AlwaysBlock",
    "AssignmentFact",
    "ControlFlowFact",
    "FlowEdge",
    "FsmFact",
    "IncludeCycleError",
    "InstanceFact",
    "MissingIncludeError",
    "ModuleFact",
    "PortDecl",
    "RtlDesign",
    "RtlParseError",
    "SignalDecl",
    "UnknownTopError",
    "build_design",
    "dataflow_edges",
    "detect_fsms",
    "extract_assignments",
    "extract_valid_signals",
    "parse_rtl",
    "preprocess_includes",
]

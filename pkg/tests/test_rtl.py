from pathlib import Path

import pytest
import yaml

from kgsva.rtl import (
    FlowEdge,
    IncludeCycleError,
    MissingIncludeError,
    RtlParseError,
    UnknownTopError,
    build_design,
    dataflow_edges,
    extract_valid_signals,
    parse_rtl,
    preprocess_includes,
)
from kgsva.rtl.analysis import expr_signals
from helpers import DATA_DIR, UART_DIR, UART_RTL

CORPUS = sorted((DATA_DIR / "rtl").glob("*.v"))
GOLDENS = yaml.safe_load((DATA_DIR / "rtl_goldens.yaml").read_text())


def _kind(a):
    return "c" if a.continuous else ("b" if a.blocking else "nb")


def facts(m):
    out = {
        "ports": [f"{p.name} {p.direction} {p.width} {p.kind}" for p in m.ports],
        "signals": [f"{s.name} {s.kind} {s.width}" + (" implicit" if s.implicit else "") for s in m.internal_signals],
        "assigns": [f"{a.lhs} <- {','.join(a.rhs_signals)} {_kind(a)}" for a in m.assignments],
        "controls": sorted(f"{c.kind} {','.join(c.condition_signals)} -> {','.join(c.governed_lhs)}" for c in m.control_flows),
        "fsms": [f"{f.state_signal} {f.clock_signal or '-'} {f.detection}" for f in m.fsms],
    }
    if m.instances:
        out["instances"] = [
            f"{i.instance_name} {i.module_name} " + " ".join(f"{k}={v}" for k, v in i.port_connections.items())
            for i in m.instances
        ]
    if m.params:
        out["params"] = dict(m.params)
    return out


@pytest.fixture(scope="module")
def corpus():
    warnings = []
    return build_design(CORPUS, warnings=warnings), warnings


def test_corpus_size():
    assert len(CORPUS) >= 10
    assert len(GOLDENS) >= 10


@pytest.mark.parametrize("name", sorted(GOLDENS))
def test_corpus_matches_golden(corpus, name):
    design, warnings = corpus
    assert warnings == []
    expected = dict(GOLDENS[name])
    expected["controls"] = sorted(expected["controls"])
    assert facts(design.modules[name]) == expected


def test_external_module_recorded(corpus):
    design, _ = corpus
    assert design.external_modules == ["ext_cell"]


def test_port_width_example():
    (m,) = parse_rtl("module m(input [7:0] data_in); endmodule")
    p = m.ports[0]
    assert (p.name, p.direction, p.width) == ("data_in", "input", 8)


def test_empty_file():
    assert parse_rtl("") == []
    assert parse_rtl("// only a comment\n") == []


def test_parse_error_has_position():
    with pytest.raises(RtlParseError) as info:
        parse_rtl("module m(input a);\n  assign = ;\nendmodule\n", "bad.v")
    assert info.value.file == "bad.v" and info.value.line == 2


def test_unsupported_construct_warns_and_continues():
    warnings = []
    text = """
module g(input clk, output y);
  function f; input x; f = x; endfunction
  assign y = clk;
endmodule
"""
    (m,) = parse_rtl(text, "g.v", warnings)
    assert warnings and "function" in warnings[0]
    assert [a.lhs for a in m.assignments] == ["y"]


def test_deterministic(corpus):
    again = build_design(CORPUS)
    assert again.to_dict() == corpus[0].to_dict()


def test_includes(tmp_path):
    (tmp_path / "b.vh").write_text("wire inc_w;\n")
    (tmp_path / "a.v").write_text('module a;\n`include "b.vh"\nendmodule\n')
    out = preprocess_includes([tmp_path / "a.v"])
    assert out[str(tmp_path / "a.v")] == "module a;\nwire inc_w;\n\nendmodule\n"

    plain = tmp_path / "p.v"
    plain.write_text("module p; endmodule\n")
    assert preprocess_includes([plain])[str(plain)] == plain.read_text()

    (tmp_path / "c.v").write_text('`include "c.v"\n')
    with pytest.raises(IncludeCycleError):
        preprocess_includes([tmp_path / "c.v"])
    (tmp_path / "d.v").write_text('`include "nope.vh"\n')
    with pytest.raises(MissingIncludeError) as info:
        preprocess_includes([tmp_path / "d.v"])
    assert "nope.vh" in str(info.value)


def test_include_dirs(tmp_path):
    inc = tmp_path / "inc"
    inc.mkdir()
    (inc / "defs.vh").write_text("// defs\n")
    (tmp_path / "a.v").write_text('`include "defs.vh"\nmodule a; endmodule\n')
    with pytest.raises(MissingIncludeError):
        preprocess_includes([tmp_path / "a.v"])
    assert "// defs" in preprocess_includes([tmp_path / "a.v"], [inc])[str(tmp_path / "a.v")]


def test_expr_signals_literals_and_selects():
    assert expr_signals("data[3:0] + 4'hA") == ["data"]
    assert expr_signals("a & b") == ["a", "b"]
    assert expr_signals("$clog2(W) + x", params=["W"]) == ["x"]


def test_dataflow_rules(corpus):
    design, _ = corpus
    edges = set(dataflow_edges(design))
    assert FlowEdge("chain", "a", "chain", "b") in edges
    assert FlowEdge("chain", "b", "chain", "c") in edges
    assert FlowEdge("chain", "a", "chain", "c") not in edges
    assert FlowEdge("parent", "in_a", "leaf", "din") in edges
    assert FlowEdge("leaf", "dout", "parent", "mid") in edges
    assert FlowEdge("parent", "mid", "leaf", "din") in edges  # positional binding
    assert FlowEdge("leaf", "dout", "parent", "out_a") in edges
    assert not any(e.src == e.dst and e.src_module == e.dst_module for e in edges)


def test_assignment_lhs_declared(corpus):
    design, _ = corpus
    for m in design.modules.values():
        names = set(m.declared_names())
        assert all(a.lhs in names for a in m.assignments)


def test_fsm_span_points_at_always_block(corpus):
    design, _ = corpus
    (fsm,) = design.modules["fsm"].fsms
    spans = {b.source_span for b in design.modules["fsm"].always_blocks}
    file, line = fsm.source_span.rsplit(":", 1)
    assert file.endswith("t04_fsm.v")
    assert any(s.rsplit(":", 1)[0] == file and int(s.rsplit(":", 1)[1]) <= int(line) for s in spans)


# --- the bundled uart-like design ---------------------------------------


@pytest.fixture(scope="module")
def uart():
    return build_design(UART_RTL, [UART_DIR])


def test_uart_names(uart):
    assert {"baud_gen", "uart_tx", "uart_rx", "uart_top"} <= set(uart.modules)
    assert uart.top == "uart_top"
    top = uart.modules["uart_top"]
    ports = {p.name for p in top.ports}
    assert {"tx_busy", "new_tx_data", "ce_16", "new_rx_data", "clock", "reset"} <= ports
    assert {i.module_name for i in top.instances} == {"baud_gen", "uart_tx", "uart_rx"}


def test_uart_valid_signals(uart):
    assert extract_valid_signals(uart) == {
        "clock", "reset", "ser_in", "ser_out", "rx_data", "new_rx_data", "tx_data",
        "new_tx_data", "tx_busy", "ce_16", "baud_freq", "baud_limit",
    }


def test_uart_rx_fsm(uart):
    fsms = {f.state_signal: f for f in uart.modules["uart_rx"].fsms}
    assert fsms["current_state"].clock_signal == "clock"
    assert fsms["current_state"].detection == "both"


def test_valid_signals_rules():
    design = build_design_from_text(
        "module top(input a, output b); reg baud_count; reg [3:0] ctrl_reg; assign b = a; endmodule"
    )
    assert extract_valid_signals(design, "top") == {"a", "b"}
    with pytest.raises(UnknownTopError):
        extract_valid_signals(design, "nope")
    empty = build_design_from_text("module lonely; endmodule")
    assert extract_valid_signals(empty, "lonely") == set()


def test_valid_signals_with_spec_register():
    from kgsva.graph import Graph, KGNode

    design = build_design_from_text("module top(input a); reg ctrl_reg; reg baud_count; endmodule")
    g = Graph().add_node(KGNode("spec:Register:ctrl_reg", "ctrl_reg", "Register"))
    assert extract_valid_signals(design, "top", g) == {"a", "ctrl_reg"}


def build_design_from_text(text):
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        f = Path(d) / "x.v"
        f.write_text(text)
        return build_design([f])

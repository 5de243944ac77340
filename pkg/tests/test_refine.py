import tempfile
from pathlib import Path

from kgsva.graph import Graph, KGNode, components
from kgsva.matching import AbbrevDict
from kgsva.refine import module_id, refine, signal_id
from kgsva.rtl import build_design

from helpers import UART_DIR, UART_RTL


def design_from(text):
    with tempfile.TemporaryDirectory() as d:
        f = Path(d) / "x.v"
        f.write_text(text)
        return build_design([f])


def test_single_module_two_ports():
    g, matches, _ = refine(Graph(), design_from("module m(input a, output b); endmodule"))
    assert sorted(n.node_type for n in g.nodes.values()) == ["module", "port", "port"]
    assert [(e.src, e.dst, e.relation) for e in g.edges] == [
        ("rtl:module:m", "rtl:m:sig:a", "contains"),
        ("rtl:module:m", "rtl:m:sig:b", "contains"),
    ]
    assert "root" not in g.nodes and matches == []


def test_exact_link_and_g0_preserved():
    g0 = Graph()
    g0.add_node(KGNode("spec:Clock:pclk", "PCLK", "Clock", "APB clock", ["c0"]))
    g0.add_node(KGNode("spec:Section:s1", "Intro", "Section", "", ["c0"]))
    g, matches, audit = refine(g0, design_from("module apb(input PCLK, input PRESETn); endmodule"))
    assert all(nid in g.nodes and g.nodes[nid] == g0.nodes[nid] for nid in g0.nodes)
    assert len(g0) == 2  # input untouched
    (m,) = matches
    assert (m.spec_node, m.rtl_node, m.score, m.method) == ("spec:Clock:pclk", "rtl:apb:sig:PCLK", 1.0, "exact")
    link = [e for e in g.edges if e.relation == "links_to_spec"]
    assert [(e.src, e.dst, e.weight) for e in link] == [("rtl:apb:sig:PCLK", "spec:Clock:pclk", 1.0)]
    assert len(components(g)) == 1  # the unlinked section got rooted in
    assert any(r["kept"] for r in audit)


def test_fsm_node_and_edges():
    text = """
module f(input clk, input go, output reg [1:0] st);
  localparam A = 2'd0, B = 2'd1;
  always @(posedge clk) begin
    case (st)
      A: if (go) st <= B;
      B: st <= A;
    endcase
  end
endmodule
"""
    g, _, _ = refine(Graph(), design_from(text))
    fsm = g.nodes["rtl:f:fsm:st"]
    assert fsm.node_type == "fsm" and fsm.attrs["clock"] == "clk"
    rels = {(e.src, e.dst, e.relation) for e in g.edges}
    assert ("rtl:f:fsm:st", "rtl:module:f", "has_fsm") in rels
    assert ("rtl:f:fsm:st", "rtl:f:sig:st", "contains") in rels


def test_uart_refine():
    design = build_design(UART_RTL, [UART_DIR])
    g0 = Graph()
    g0.add_node(KGNode("spec:Signal:transmit busy", "transmit busy", "Signal", "busy flag", ["c0"]))
    g0.add_node(KGNode("spec:Clock:clock", "clock", "Clock", "", ["c0"]))
    g, matches, _ = refine(g0, design, AbbrevDict.load())
    by_spec = {m.spec_node: m for m in matches}
    assert by_spec["spec:Signal:transmit busy"].rtl_node == signal_id("uart_top", "tx_busy")
    assert by_spec["spec:Clock:clock"].rtl_node == signal_id("uart_top", "clock")
    for name in ("uart_top", "uart_tx", "uart_rx", "baud_gen"):
        assert module_id(name) in g.nodes
    assert any(e.relation == "drives" and e.src.startswith("rtl:uart_tx") for e in g.edges)
    assert len(components(g)) == 1


def test_refine_deterministic():
    from kgsva.graph import serialize

    design = build_design(UART_RTL, [UART_DIR])
    assert serialize(refine(Graph(), design)[0]) == serialize(refine(Graph(), design)[0])

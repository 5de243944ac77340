import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgsva.assets import load_schema
from kgsva.graph import serialize
from kgsva.ingest import (
    ExtractionRecord,
    SpecDocument,
    assemble_graph,
    chunk_for_extraction,
    extract_chunk,
    extraction_prompt,
    parse_extraction,
    reconstruct,
    summarize_merged_description,
)
from kgsva.llm import MockProvider, ProviderError, ScriptRule

SCHEMA = load_schema()


def words(n):
    return " ".join(f"w{i}" for i in range(n))


def test_chunk_offsets_oracle():
    doc = SpecDocument("spec", words(1000))
    chunks = chunk_for_extraction(doc, 400, 100)
    # stride = 400 - 100; starts are multiples of the stride below 1000
    assert [c.token_start for c in chunks] == list(range(0, 1000, 300))
    assert [c.chunk_id for c in chunks] == ["spec-0000", "spec-0001", "spec-0002", "spec-0003"]
    assert reconstruct(chunks) == doc.text


def test_chunk_short_doc_and_zero_overlap():
    doc = SpecDocument("d", "only a few words here")
    assert len(chunk_for_extraction(doc, 400, 100)) == 1
    doc = SpecDocument("d", words(90))
    chunks = chunk_for_extraction(doc, 30, 0)
    assert "".join(c.text for c in chunks) == doc.text
    assert [c.token_start for c in chunks] == [0, 30, 60]


def test_chunk_rejects_bad_params():
    with pytest.raises(ValueError):
        chunk_for_extraction(SpecDocument("d", "x"), 10, 10)
    with pytest.raises(ValueError):
        SpecDocument("d", "   ")


@settings(max_examples=50, deadline=None)
@given(
    st.text(alphabet=st.sampled_from(list("ab c.\n,")), min_size=1, max_size=400).filter(str.strip),
    st.integers(2, 40),
    st.data(),
)
def test_chunk_reconstruction_property(text, size, data):
    overlap = data.draw(st.integers(0, size - 1))
    chunks = chunk_for_extraction(SpecDocument("d", text), size, overlap)
    assert reconstruct(chunks) == text


def test_prompt_contains_schema_and_text():
    p = extraction_prompt(SCHEMA, "PCLK drives the bus")
    assert "Text: PCLK drives the bus" in p
    assert "Clock" in p and "hasSection" in p
    assert "{tuple_delimiter}" not in p and "<|>" in p


def test_extract_chunk_parses_fixture_reply():
    reply = '("entity"<|>PCLK<|>Clock<|>APB clock input)\n<|COMPLETE|>'
    llm = MockProvider(rules=[ScriptRule(["Text:"], reply)])
    rec = extract_chunk(llm, SCHEMA, "The APB uses PCLK.")
    assert rec.entities == [("PCLK", "Clock", "APB clock input")]


def test_out_of_schema_relation_dropped():
    reply = (
        '("entity"<|>A<|>Signal<|>a)\n("entity"<|>B<|>Signal<|>b)\n'
        '("relationship"<|>A<|>B<|>fliesTo<|>nonsense<|>3)\n'
        '("relationship"<|>A<|>B<|>uses<|>ok)\n'
        "garbage line\n"
    )
    rec = parse_extraction(reply, SCHEMA, "c0")
    assert rec.dropped == 1
    assert rec.relations == [("A", "B", "uses", "ok", 1.0)]
    assert rec.skipped_lines == 1


def test_case_insensitive_type_canonicalised():
    rec = parse_extraction('("entity"<|>clk<|>clock<|>x)', SCHEMA, "c0")
    assert rec.entities == [("clk", "Clock", "x")]


def test_empty_reply_warns(caplog):
    llm = MockProvider(rules=[ScriptRule(["Text:"], "")])
    with caplog.at_level(logging.WARNING):
        rec = extract_chunk(llm, SCHEMA, "text")
    assert rec.entities == [] and rec.relations == []
    assert "no usable records" in caplog.text


def test_provider_failure_propagates():
    llm = MockProvider(fail_on=["Text:"])
    with pytest.raises(ProviderError):
        extract_chunk(llm, SCHEMA, "text")


def test_assemble_merges_and_placeholders():
    r1 = ExtractionRecord("c0", entities=[("pclk", "Clock", "clock one")])
    r2 = ExtractionRecord(
        "c1",
        entities=[("PCLK", "Clock", "clock two")],
        relations=[("PCLK", "FIFO1", "uses", "reads", 2.0)],
    )
    g = assemble_graph([r1, r2], SCHEMA)
    clocks = [n for n in g.nodes.values() if n.node_type == "Clock"]
    assert len(clocks) == 1
    assert clocks[0].description == "clock one; clock two"
    assert clocks[0].source_ids == ["c0", "c1"]
    placeholder = g.nodes["spec:Component:fifo1"]
    assert placeholder.node_type == "Component"
    assert len(g.edges) == 1 and g.edges[0].weight == 2.0
    assert all(n.source_ids for n in g.nodes.values())
    assert all(e.source_ids for e in g.edges)


def test_same_name_different_types_stay_apart():
    r = ExtractionRecord("c0", entities=[("STATUS", "Register", "r"), ("STATUS", "Signal", "s")])
    assert len(assemble_graph([r], SCHEMA)) == 2


def test_assemble_empty():
    assert len(assemble_graph([], SCHEMA)) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_assembly_order_insensitive(seed):
    rng = random.Random(seed)
    names = ["clk", "rst", "tx", "rx", "fifo"]
    records = []
    for i in range(rng.randint(1, 6)):
        ents = [(rng.choice(names).upper() if rng.random() < 0.5 else rng.choice(names), "Signal", f"d{i}")]
        rels = [(rng.choice(names), rng.choice(names), "uses", f"r{i}", 1.0)]
        records.append(ExtractionRecord(f"c{i}", ents, rels))
    shuffled = records[:]
    rng.shuffle(shuffled)
    assert serialize(assemble_graph(records, SCHEMA)) == serialize(assemble_graph(shuffled, SCHEMA))


def test_summarize_mock_contract():
    llm = MockProvider()
    assert summarize_merged_description(llm, "X", ["A", "B"]) == "A; B"
    assert summarize_merged_description(llm, "X", ["only"]) == "only"
    assert llm.total_calls == 0


def test_summarize_uses_scripted_reply_and_falls_back():
    llm = MockProvider(rules=[ScriptRule(["entity 'X'"], "merged")])
    assert summarize_merged_description(llm, "X", ["A", "B"]) == "merged"
    assert llm.total_calls == 1
    bad = MockProvider(rules=[ScriptRule(["entity 'X'"], "merged")], fail_on=["entity 'X'"])
    assert summarize_merged_description(bad, "X", ["A", "B"]) == "A; B"


def test_long_descriptions_trigger_summary():
    llm = MockProvider(rules=[ScriptRule(["entity 'big'"], "short")])
    recs = [ExtractionRecord(f"c{i}", entities=[("big", "Signal", "x" * 600 + str(i))]) for i in range(2)]
    g = assemble_graph(recs, SCHEMA, llm)
    assert g.nodes["spec:Signal:big"].description == "short"

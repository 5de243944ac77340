import math
import random
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgsva.graph import Graph, KGNode
from kgsva.matching import MIN_SCORE, AbbrevDict, levenshtein, match_score, normalize
from kgsva.refine import link_spec_to_rtl

ABBR = AbbrevDict.load()


def ref_levenshtein(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0 or j == 0:
            return i + j
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def ref_edit_score(a, b):
    na, nb = normalize(a), normalize(b)
    dist = ref_levenshtein(na, nb)
    if dist > math.ceil(max(len(na), len(nb)) / 4):
        return 0.0
    return max(0.0, 0.8 - 0.1 * dist)


@pytest.mark.parametrize(
    "spec,rtl,score,method",
    [
        ("tx_data_valid", "TX_DATA_VALID", 0.8, "normalization"),
        ("tx data valid", "tx_data_valid", 0.8, "normalization"),
        ("transmit data valid", "tx_data_valid", 0.9, "abbreviation"),
        ("reset", "rst", 0.9, "abbreviation"),
        ("clock", "clk", 0.9, "abbreviation"),
        ("PCLK", "PCLK", 1.0, "exact"),
        ("reset", "reset_n", 0.8, "active_low"),
        ("PRESET", "PRESETn", 0.8, "active_low"),
    ],
)
def test_golden_vectors(spec, rtl, score, method):
    assert match_score(spec, rtl, ABBR) == pytest.approx((score, method))


def test_edit_distance_example_against_reference():
    # normalized names "datavalid" / "datavaild" differ by two substitutions
    assert ref_levenshtein("datavalid", "datavaild") == 2
    score, method = match_score("data_valid", "data_vaild", ABBR)
    assert method == "edit_distance"
    assert score == pytest.approx(ref_edit_score("data_valid", "data_vaild")) == pytest.approx(0.6)


def test_length_cap_rejects_far_names():
    assert match_score("ab", "xy", ABBR) == (0.0, "edit_distance")


def test_abbrev_lookup_symmetric():
    assert ABBR.canonical("rst") == "reset" and ABBR.canonical("reset") == "reset"
    assert ABBR.inverse["irq"] == "interrupt" and ABBR.inverse["int"] == "interrupt"


ident = st.text(alphabet=st.sampled_from(list("abcdrstxyn_ ")), min_size=1, max_size=12).filter(
    lambda s: normalize(s)
)


@settings(max_examples=50, deadline=None)
@given(ident, ident)
def test_score_properties(a, b):
    s_ab, m_ab = match_score(a, b, ABBR)
    s_ba, m_ba = match_score(b, a, ABBR)
    assert 0.0 <= s_ab <= 1.0
    if m_ab in ("exact", "normalization", "edit_distance") or m_ba in ("exact", "normalization", "edit_distance"):
        assert s_ab == pytest.approx(s_ba)
    if m_ab == "edit_distance":
        assert s_ab == pytest.approx(ref_edit_score(a, b))
    assert levenshtein(normalize(a), normalize(b)) == ref_levenshtein(normalize(a), normalize(b))


def _graph(spec_names, rtl_names):
    g = Graph()
    for n in spec_names:
        g.add_node(KGNode(f"spec:Signal:{n}", n, "Signal"))
    for n in rtl_names:
        g.add_node(KGNode(f"rtl:top:sig:{n}", n, "port", module="top"))
    return g


def test_link_name_variants():
    names = ["transmit data valid", "TX_DATA_VALID", "tx data valid"]
    g = _graph(names, ["tx_data_valid", "rx_ready"])
    matches, audit = link_spec_to_rtl(g, ABBR)
    assert {m.spec_node for m in matches} == {f"spec:Signal:{n}" for n in names}
    assert all(m.rtl_node == "rtl:top:sig:tx_data_valid" and m.score >= MIN_SCORE for m in matches)
    assert sum(1 for e in g.edges if e.relation == "links_to_spec") == 3


def test_link_tie_goes_to_smallest_name():
    g = _graph(["data_bus"], ["DATA_BUS", "Data_Bus"])
    (m,) = link_spec_to_rtl(g, ABBR)[0]
    assert m.rtl_node == "rtl:top:sig:DATA_BUS"


def test_link_threshold(caplog):
    g = _graph(["interrupt"], ["baud_limit"])
    matches, _ = link_spec_to_rtl(g, ABBR)
    assert matches == []
    assert "no RTL match" in caplog.text


def test_link_exact_pclk():
    g = _graph(["PCLK"], ["PCLK"])
    (m,), _ = link_spec_to_rtl(g, ABBR)
    assert (m.score, m.method) == (1.0, "exact")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_no_link_below_threshold(seed):
    rng = random.Random(seed)
    pool = ["clk", "clock", "rst", "reset_n", "tx_busy", "txbusy", "data", "dat", "irq", "ready", "rdy"]
    g = _graph(rng.sample(pool, 4), rng.sample(pool, 5))
    matches, audit = link_spec_to_rtl(g, ABBR)
    assert all(m.score >= MIN_SCORE for m in matches)
    assert len({m.spec_node for m in matches}) == len(matches)
    for m in matches:
        rows = [r for r in audit if r["spec_node"] == m.spec_node]
        assert max(r["score"] for r in rows) == m.score

"""Loaders for the SVA golden corpus and the malformed-input list."""

from helpers import DATA_DIR


def golden_svas():
    out, name, lines = [], None, []
    for raw in (DATA_DIR / "sva_golden.txt").read_text().splitlines() + [""]:
        if raw.startswith("# ") and name is None and not lines and out is not None:
            head = raw[2:].strip()
            if " " not in head:
                name = head
            continue
        if not raw.strip():
            if name and lines:
                out.append((name, "\n".join(lines)))
            name, lines = None, []
            continue
        lines.append(raw)
    return out


# (text, line, col) of the first offending token
MALFORMED = [
    ("@(posedge clk) a |-> |-> b", 1, 22),
    ("@(posedge clk a |-> b", 1, 15),
    ("@(edge clk) a |-> b", 1, 8),
    ("(posedge clk) a |-> b", 1, 1),
    ("@(posedge clk) (a && b |-> c", 1, 29),
    ("@(posedge clk) a && |-> b", 1, 21),
    ("@(posedge clk) a |-> ##x b", 1, 24),
    ("@(posedge clk) a |->", 1, 21),
    ("@(posedge clk) $bogus(a) |-> b", 1, 16),
    ("@(posedge clk)\n  a |-> b)", 2, 10),
    ("@(posedge clk) disable iff a |-> b", 1, 28),
    ("@(posedge clk) a ==> b", 1, 20),
    ("", 1, 1),
    ("@(posedge clk) a |-> b c", 1, 24),
]

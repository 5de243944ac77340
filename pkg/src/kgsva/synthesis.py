"""Multi-resolution context synthesis and plan/assertion generation.

Global summaries and a per-signal description form a fixed preamble; pruned
retrieval snippets and walk paths are spread over up to ``B`` prompts, each
kept under the token limit.  Each prompt yields natural-language plans, and
plans are turned into assertions three at a time.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .assets import read_asset, render
from .contexts import PRUNABLE_TYPES, SUMMARY_TYPES, ContextItem, SvaRecord
from .llm import LlmProvider, ProviderError, approx_count

logger = logging.getLogger(__name__)

TokenCount = Callable[[str], int]

DEFAULT_BUDGET = 3
TOKEN_LIMIT_FRACTION = 0.75
PLANS_PER_SVA_CALL = 3
PLAN_PREFIX = "Plan:"

SUMMARY_TEMPLATES = {
    "summary_design": "summary_design.txt",
    "summary_rtl": "summary_rtl.txt",
    "summary_signals": "summary_signals.txt",
    "summary_patterns": "summary_patterns.txt",
}
SUMMARY_LABELS = {
    "summary_design": "Design summary",
    "summary_rtl": "RTL architecture summary",
    "summary_signals": "Signals summary",
    "summary_patterns": "Design patterns summary",
    "signal_desc": "Signal description",
}


class UnknownSignalError(ValueError):
    pass


class PreambleOverflowError(ValueError):
    pass


def token_limit_for(context_window: int) -> int:
    return int(context_window * TOKEN_LIMIT_FRACTION)


def truncate_to_tokens(text: str, limit: int, count: TokenCount = approx_count) -> str:
    """Longest prefix of ``text`` whose token count is within ``limit``."""
    if count(text) <= limit:
        return text
    lo, hi = 0, len(text)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if count(text[:mid]) <= limit:
            lo = mid
        else:
            hi = mid - 1
    return text[:lo]


# ---------------------------------------------------------------- summaries


def _ask(llm: LlmProvider, prompt: str, ctx_type: str, signal: str = "", provenance: str = "") -> ContextItem:
    try:
        reply = llm.complete(prompt).strip()
    except ProviderError as exc:
        logger.warning("%s generation failed: %s", ctx_type, exc)
        return ContextItem(ctx_type, f"[{SUMMARY_LABELS[ctx_type]} unavailable]", 0.0, provenance, signal, True)
    if not reply:
        return ContextItem(ctx_type, f"[{SUMMARY_LABELS[ctx_type]} unavailable]", 0.0, provenance, signal, True)
    return ContextItem(ctx_type, reply, 1.0, provenance, signal)


def _input_budget(llm: LlmProvider, parts: int) -> int:
    # leave room for the template text itself and the reply
    return max(256, token_limit_for(llm.context_window) // max(1, parts) - 512)


def generate_global_summaries(
    llm: LlmProvider, spec_text: str, rtl_text: str, valid_signals: Iterable[str]
) -> List[ContextItem]:
    """Four summaries (design, RTL, signals, patterns).

    Reuse across signals and runs comes from the provider's content-addressed
    cache: identical inputs render identical prompts.
    """
    budget = _input_budget(llm, 2)
    spec = truncate_to_tokens(spec_text, budget)
    rtl = truncate_to_tokens(rtl_text, budget)
    signals_str = ", ".join(sorted(valid_signals))
    items = []
    for ctx_type, template in SUMMARY_TEMPLATES.items():
        prompt = render(read_asset(template), spec_text=spec, rtl_text=rtl, signals_str=signals_str)
        items.append(_ask(llm, prompt, ctx_type, provenance=template))
    return items


def generate_signal_description(
    llm: LlmProvider, signal: str, spec_text: str, rtl_text: str, valid_signals: Iterable[str]
) -> ContextItem:
    if signal not in set(valid_signals):
        raise UnknownSignalError(f"{signal!r} is not an architectural signal")
    budget = _input_budget(llm, 2)
    prompt = render(
        read_asset("signal_description.txt"),
        signal_name=signal,
        spec_text=truncate_to_tokens(spec_text, budget),
        rtl_text=truncate_to_tokens(rtl_text, budget),
    )
    return _ask(llm, prompt, "signal_desc", signal, "signal_description.txt")


# ---------------------------------------------------------------- pruning


@dataclass(frozen=True)
class PrunerConfig:
    max_per_type: int = 50
    max_total: int = 100
    min_per_type: int = 2

    def __post_init__(self):
        if not 0 <= self.min_per_type <= self.max_per_type <= self.max_total:
            raise ValueError("need 0 <= min_per_type <= max_per_type <= max_total")


_SELECTED_RE = re.compile(r"Selected contexts:\s*\[([^\]]*)\]", re.I)


def parse_selection(reply: str, n: int) -> Optional[List[int]]:
    """Indices from the last "Selected contexts: [...]" in ``reply``; None if absent."""
    found = _SELECTED_RE.findall(reply)
    if not found:
        return None
    out: List[int] = []
    for part in found[-1].split(","):
        part = part.strip()
        if part.lstrip("-").isdigit():
            i = int(part)
            if 0 <= i < n and i not in out:
                out.append(i)
    return out


def _context_block(i: int, ctx_type: str, item: ContextItem, text: Optional[str] = None) -> str:
    meta = f"(source: {ctx_type}, score: {item.score:.3f}, from: {item.provenance})"
    return f"[CONTEXT {i}] {meta}\n{item.text if text is None else text}"


_BLOCK_SEP = "\n\n----\n\n"


def pruner_prompt(
    signal: str,
    query: str,
    ctx_type: str,
    items: Sequence[ContextItem],
    cfg: PrunerConfig,
    texts: Optional[Sequence[str]] = None,
) -> str:
    """Selection prompt listing ``items`` as numbered contexts (``texts`` overrides the shown text)."""
    blocks = [_context_block(i, ctx_type, item, texts[i] if texts else None) for i, item in enumerate(items)]
    return render(
        read_asset("pruner.txt"),
        signal_name=signal,
        query=query,
        min_selection=min(cfg.min_per_type, len(items)),
        max_selection=min(cfg.max_per_type, len(items)),
        context_type=ctx_type,
        contexts=_BLOCK_SEP.join(blocks),
    )


def pruner_batches(
    signal: str,
    query: str,
    ctx_type: str,
    items: Sequence[ContextItem],
    cfg: PrunerConfig,
    token_limit: int,
    count: TokenCount = approx_count,
) -> List[Tuple[List[int], str]]:
    """Split ``items`` into consecutive batches whose selection prompts fit ``token_limit``.

    Returns ``(indices, prompt)`` pairs.  A context too long to fit even on
    its own is shown truncated.
    """
    overhead = count(pruner_prompt(signal, query, ctx_type, [], cfg)) + 16
    room = max(1, token_limit - overhead)
    batches: List[List[int]] = [[]]
    used = 0
    texts: Dict[int, str] = {}
    for i, item in enumerate(items):
        block = _context_block(len(batches[-1]), ctx_type, item)
        cost = count(_BLOCK_SEP + block)
        if cost > room:
            head = count(_BLOCK_SEP + _context_block(len(batches[-1]), ctx_type, item, ""))
            texts[i] = truncate_to_tokens(item.text, max(0, room - head - 4), count)
            cost = room
        if batches[-1] and used + cost > room:
            batches.append([])
            used = 0
        batches[-1].append(i)
        used += cost
    out = []
    for idx in batches:
        if idx:
            shown = [texts.get(i, items[i].text) for i in idx]
            out.append((idx, pruner_prompt(signal, query, ctx_type, [items[i] for i in idx], cfg, shown)))
    return out


def _by_score(items: Sequence[ContextItem]) -> List[int]:
    return sorted(range(len(items)), key=lambda i: (-items[i].score, i))


def dedupe(items: Sequence[ContextItem]) -> List[ContextItem]:
    """Drop exact-duplicate texts within a type, keeping the highest-scoring copy."""
    best: Dict[Tuple[str, str], ContextItem] = {}
    for item in items:
        key = (item.ctx_type, item.text)
        if key not in best or item.score > best[key].score:
            best[key] = item
    keep = {id(v) for v in best.values()}
    return [it for it in items if id(it) in keep]


def prune(
    llm: Optional[LlmProvider],
    signal: str,
    query: str,
    candidates: Sequence[ContextItem],
    cfg: PrunerConfig = PrunerConfig(),
) -> List[ContextItem]:
    """Selection calls per prunable context type, then per-type and global caps.

    Each type's candidates go out in as few calls as fit the provider's
    token limit; selections from all calls of a type are pooled.

    Items of other types (summaries, signal descriptions) are passed through
    untouched and do not count toward the caps.
    """
    passthrough = [c for c in candidates if c.ctx_type not in PRUNABLE_TYPES]
    groups: Dict[str, List[ContextItem]] = defaultdict(list)
    for c in dedupe([c for c in candidates if c.ctx_type in PRUNABLE_TYPES]):
        groups[c.ctx_type].append(c)

    chosen: Dict[str, List[ContextItem]] = {}
    for ctx_type in PRUNABLE_TYPES:
        items = groups.get(ctx_type, [])
        if not items:
            continue
        floor = min(cfg.min_per_type, len(items))
        selection: Optional[List[int]] = list(range(len(items))) if len(items) <= floor else None
        if selection is None and llm is not None:
            limit = token_limit_for(llm.context_window)
            for idx, prompt in pruner_batches(signal, query, ctx_type, items, cfg, limit):
                try:
                    local = parse_selection(llm.complete(prompt), len(idx))
                except ProviderError as exc:
                    logger.warning("pruner call failed for %s/%s: %s", signal, ctx_type, exc)
                    continue
                if local is not None:
                    selection = (selection or []) + [idx[j] for j in local]
            if selection is None:
                logger.info("pruner reply for %s/%s unparseable; using top scores", signal, ctx_type)
        picked = list(dict.fromkeys(selection or []))
        if len(picked) > cfg.max_per_type:
            # over-selection: keep the best-scoring of the chosen items
            picked = sorted(picked, key=lambda i: (-items[i].score, i))[: cfg.max_per_type]
        for i in _by_score(items):
            if len(picked) >= floor:
                break
            if i not in picked:
                picked.append(i)
        chosen[ctx_type] = [items[i] for i in sorted(picked)]

    total = sum(len(v) for v in chosen.values())
    if total > cfg.max_total:
        pool = sorted(
            ((c.score, t, k) for t, v in chosen.items() for k, c in enumerate(v)),
            key=lambda x: (x[0], x[1], -x[2]),
        )
        drop = set()
        counts = {t: len(v) for t, v in chosen.items()}
        for protect in (True, False):
            for score, t, k in pool:
                if total <= cfg.max_total:
                    break
                if (t, k) in drop or (protect and counts[t] <= cfg.min_per_type):
                    continue
                drop.add((t, k))
                counts[t] -= 1
                total -= 1
        chosen = {t: [c for k, c in enumerate(v) if (t, k) not in drop] for t, v in chosen.items()}
    return passthrough + [c for t in PRUNABLE_TYPES for c in chosen.get(t, [])]


# ---------------------------------------------------------------- prompt assembly


@dataclass
class AssembledPrompt:
    ordinal: int
    text: str
    token_count: int
    items: List[ContextItem] = field(default_factory=list)

    def section(self, ctx_type: str) -> str:
        return "\n\n".join(i.text for i in self.items if i.ctx_type == ctx_type)


@dataclass
class PromptBundle:
    signal: str
    prompts: List[AssembledPrompt]
    budget_B: int = DEFAULT_BUDGET
    token_limit: int = 0
    preamble: List[ContextItem] = field(default_factory=list)
    dropped: int = 0

    def to_dict(self) -> dict:
        return {
            "signal": self.signal,
            "budget_B": self.budget_B,
            "token_limit": self.token_limit,
            "dropped": self.dropped,
            "prompts": [
                {"ordinal": p.ordinal, "token_count": p.token_count, "text": p.text} for p in self.prompts
            ],
        }


def format_preamble(preamble: Sequence[ContextItem], include_signal_desc: bool = True) -> str:
    parts = []
    for item in preamble:
        if item.ctx_type == "signal_desc" and not include_signal_desc:
            continue
        parts.append(f"{SUMMARY_LABELS.get(item.ctx_type, item.ctx_type)}:\n{item.text}")
    return "\n\n".join(parts)


def _compose(preamble_text: str, items: Sequence[ContextItem]) -> str:
    rag = "\n\n".join(i.text for i in items if i.ctx_type == "rag")
    grw = "\n\n".join(i.text for i in items if i.ctx_type == "kg_path")
    return f"Relevant Context:\n{preamble_text}\n\nRAG Context:\n{rag}\n\nGRW-AS Context:\n{grw}"


def assemble_prompts(
    signal: str,
    summaries: Sequence[ContextItem],
    pruned: Sequence[ContextItem],
    token_limit: int,
    B: int = DEFAULT_BUDGET,
    reserve_tokens: int = 0,
    count: TokenCount = approx_count,
) -> PromptBundle:
    """Spread pruned items over up to ``B`` prompts sharing one preamble.

    Items are dealt round-robin in descending score order; an item that does
    not fit its turn's prompt goes to the next prompt (cyclically) with room,
    and is dropped if none has.  ``reserve_tokens`` is held back for the
    surrounding template.  Prompt sizes are tracked as the sum of their
    parts' counts, an upper bound on the count of the joined text.
    """
    if B < 1:
        raise ValueError("prompt budget B must be at least 1")
    order = {t: k for k, t in enumerate(SUMMARY_TYPES + ("signal_desc",))}
    preamble = sorted(
        (s for s in summaries if s.ctx_type in order), key=lambda s: order[s.ctx_type]
    )
    preamble_text = format_preamble(preamble)
    base = count(_compose(preamble_text, [])) + reserve_tokens
    if base > token_limit:
        raise PreambleOverflowError(
            f"summaries alone need {base} tokens, over the limit of {token_limit}"
        )
    items = sorted(
        (c for c in pruned if c.ctx_type in PRUNABLE_TYPES),
        key=lambda c: (-c.score, PRUNABLE_TYPES.index(c.ctx_type), c.provenance, c.text),
    )
    slots: List[List[ContextItem]] = [[] for _ in range(B)]
    sizes = [base] * B
    dropped = 0
    for k, item in enumerate(items):
        cost = count("\n\n" + item.text)
        for off in range(B):
            p = (k + off) % B
            if sizes[p] + cost <= token_limit:
                slots[p].append(item)
                sizes[p] += cost
                break
        else:
            dropped += 1
    prompts = []
    for p, chosen in enumerate(slots):
        if p > 0 and not chosen:
            continue
        text = _compose(preamble_text, chosen)
        prompts.append(AssembledPrompt(len(prompts), text, count(text), chosen))
    if dropped:
        logger.info("%s: %d context items did not fit any prompt", signal, dropped)
    return PromptBundle(signal, prompts, B, token_limit, list(preamble), dropped)


# ---------------------------------------------------------------- plans and assertions


def _signal_pattern(signals: Iterable[str]) -> Optional[re.Pattern]:
    names = sorted(set(signals), key=len, reverse=True)
    if not names:
        return None
    return re.compile(r"(?<![\w.])(?:" + "|".join(re.escape(n) for n in names) + r")(?!\w)")


def parse_plans(reply: str) -> List[str]:
    plans = []
    for line in reply.splitlines():
        s = line.strip().lstrip("-*").strip().replace("**", "")
        if s.startswith(PLAN_PREFIX):
            text = s[len(PLAN_PREFIX):].strip()
            if text:
                plans.append(text)
    return plans


def plan_prompt(bundle: PromptBundle, prompt: AssembledPrompt, valid_signals: Iterable[str], examples: str) -> str:
    return render(
        read_asset("plan.txt"),
        signal_name=bundle.signal,
        global_summary=format_preamble(bundle.preamble),
        rag_context=prompt.section("rag"),
        grw_context=prompt.section("kg_path"),
        valid_signals=", ".join(sorted(valid_signals)),
        examples=examples,
    )


@dataclass
class PlanStats:
    kept: int = 0
    dropped_no_signal: int = 0
    failed_prompts: int = 0


def generate_plans(
    llm: LlmProvider,
    bundle: PromptBundle,
    valid_signals: Iterable[str],
    examples: Optional[str] = None,
    stats: Optional[PlanStats] = None,
) -> List[Tuple[int, str]]:
    valid = sorted(set(valid_signals))
    pattern = _signal_pattern(valid)
    examples = read_asset("plan_examples.txt").strip() if examples is None else examples
    stats = stats if stats is not None else PlanStats()
    out: List[Tuple[int, str]] = []
    for prompt in bundle.prompts:
        try:
            reply = llm.complete(plan_prompt(bundle, prompt, valid, examples))
        except ProviderError as exc:
            logger.warning("plan generation failed for %s prompt %d: %s", bundle.signal, prompt.ordinal, exc)
            stats.failed_prompts += 1
            continue
        plans = parse_plans(reply)
        if not plans:
            logger.warning("no 'Plan:' lines in reply for %s prompt %d", bundle.signal, prompt.ordinal)
        for plan in plans:
            if pattern is not None and pattern.search(plan):
                out.append((prompt.ordinal, plan))
                stats.kept += 1
            else:
                stats.dropped_no_signal += 1
    if bundle.prompts and stats.failed_prompts == len(bundle.prompts):
        logger.warning("every plan prompt failed for %s", bundle.signal)
    return out


_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z]*)[ \t]*\n?(.*?)```", re.S)


def extract_sva_blocks(reply: str) -> Tuple[List[str], int]:
    """Fenced blocks marked with an ``SVA:`` prefix, in order, plus the count of unmarked blocks."""
    blocks, ignored = [], 0
    for m in _FENCE_RE.finditer(reply):
        body = m.group(2).strip()
        before = reply[: m.start()].rstrip().splitlines()
        marked_outside = bool(before) and before[-1].strip().replace("**", "").endswith("SVA:")
        if body.startswith("SVA:"):
            body = body[len("SVA:"):].strip()
        elif not marked_outside:
            ignored += 1
            continue
        blocks.append(body)
    return blocks, ignored


def sva_prompt(
    bundle: PromptBundle, prompt: AssembledPrompt, plans: Sequence[str], signal_desc: str, examples: str
) -> str:
    return render(
        read_asset("sva.txt"),
        signal_name=bundle.signal,
        global_summary=format_preamble(bundle.preamble, include_signal_desc=False),
        signal_specific_summary=signal_desc,
        rag_context=prompt.section("rag"),
        grw_context=prompt.section("kg_path"),
        plans="\n\n".join(f"Plan {k}: {p}" for k, p in enumerate(plans, 1)),
        examples=examples,
    )


def generate_svas(
    llm: LlmProvider,
    bundle: PromptBundle,
    plans: Sequence[Tuple[int, str]],
    signal_desc: str = "",
    examples: Optional[str] = None,
) -> List[SvaRecord]:
    examples = read_asset("sva_examples.txt").strip() if examples is None else examples
    by_prompt: Dict[int, List[str]] = defaultdict(list)
    for ordinal, plan in plans:
        by_prompt[ordinal].append(plan)
    prompts = {p.ordinal: p for p in bundle.prompts}
    records: List[SvaRecord] = []
    for ordinal in sorted(by_prompt):
        group = by_prompt[ordinal]
        for start in range(0, len(group), PLANS_PER_SVA_CALL):
            batch = group[start : start + PLANS_PER_SVA_CALL]
            text = sva_prompt(bundle, prompts[ordinal], batch, signal_desc, examples)
            try:
                reply = llm.complete(text)
            except ProviderError as exc:
                logger.warning("SVA generation failed for %s prompt %d: %s", bundle.signal, ordinal, exc)
                continue
            blocks, ignored = extract_sva_blocks(reply)
            if ignored:
                logger.info("%s: ignored %d fenced blocks without an SVA: prefix", bundle.signal, ignored)
            for k in range(max(len(batch), len(blocks))):
                plan = batch[k] if k < len(batch) else ""
                if k < len(blocks):
                    records.append(SvaRecord(bundle.signal, plan, blocks[k], ordinal))
                else:
                    records.append(SvaRecord(bundle.signal, plan, "", ordinal, missing=True))
    return records

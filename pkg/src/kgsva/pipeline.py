"""End-to-end orchestration: run configuration, stages and run-directory artifacts.

Stages are content addressed.  Each stage hashes its inputs and its slice of
the configuration; when the hash matches the one recorded next to existing
artifacts the stage is skipped.  LLM replies are cached separately by
:class:`~kgsva.llm.CachedProvider`, so re-running ``generate`` with unchanged
inputs makes no provider calls.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml

from .assets import load_schema, read_asset, render
from .contexts import ContextItem, SvaRecord
from .graph import Graph, deserialize, next_hop_table, serialize
from .ingest import (
    DEFAULT_CHUNK_TOKENS,
    DEFAULT_OVERLAP_TOKENS,
    SpecDocument,
    assemble_graph,
    chunk_for_extraction,
    extract_all,
)
from .llm import CachedProvider, LlmProvider, ProviderError, ProviderSettings, approx_count, build_provider
from .matching import AbbrevDict
from .refine import refine, signal_id
from .retrieval import DEFAULT_OVERLAPS, DEFAULT_SCALES, DEFAULT_TOP_K, Grid, SourceDoc, chunks_to_contexts, load_or_build, retrieve
from .rtl import RtlDesign, build_design, extract_valid_signals, preprocess_includes
from .sva import apply_check, batch_report
from .synthesis import (
    PlanStats,
    PrunerConfig,
    assemble_prompts,
    generate_global_summaries,
    generate_plans,
    generate_signal_description,
    generate_svas,
    prune,
    token_limit_for,
)
from .walks import WalkConfig, path_to_text, run_walks

logger = logging.getLogger(__name__)

STAGE_VERSION = "1"


class ConfigError(ValueError):
    """Invalid or incomplete run configuration (including missing prerequisite artifacts)."""


class EmptyResultError(RuntimeError):
    """No signal produced any assertion."""


class ProviderFailure(RuntimeError):
    """No signal succeeded and the provider reported errors."""


# ---------------------------------------------------------------- configuration


@dataclass
class SsrSettings:
    top_k: int = DEFAULT_TOP_K
    scales: Tuple[int, ...] = DEFAULT_SCALES
    overlaps: Tuple[float, ...] = DEFAULT_OVERLAPS

    def grid(self) -> Grid:
        return Grid(tuple(self.scales), tuple(self.overlaps))


@dataclass
class RunConfig:
    spec_path: Optional[Path] = None
    rtl_paths: List[Path] = field(default_factory=list)
    include_dirs: List[Path] = field(default_factory=list)
    top_module: Optional[str] = None
    schema_path: Optional[Path] = None
    abbrev_path: Optional[Path] = None
    ssr: SsrSettings = field(default_factory=SsrSettings)
    walk: WalkConfig = field(default_factory=WalkConfig)
    pruner: PrunerConfig = field(default_factory=PrunerConfig)
    budget_B: int = 3
    provider: ProviderSettings = field(default_factory=ProviderSettings)
    seed: int = 0
    run_dir: Path = Path("run")
    cache_dir: Optional[Path] = None
    workers: int = 1
    signals: Optional[List[str]] = None
    extraction_chunk_tokens: int = DEFAULT_CHUNK_TOKENS
    extraction_overlap_tokens: int = DEFAULT_OVERLAP_TOKENS

    @classmethod
    def from_dict(cls, doc: Dict[str, Any], base_dir: Path = Path(".")) -> "RunConfig":
        """Build from a parsed config file; relative paths resolve against ``base_dir``."""
        doc = dict(doc or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        def path(v):
            return None if v in (None, "") else (base_dir / v)

        try:
            provider = dict(doc.pop("provider", None) or {})
            if provider.get("mock_dir"):
                provider["mock_dir"] = str(base_dir / provider["mock_dir"])
            walk = dict(doc.pop("walk", None) or {})
            ssr = dict(doc.pop("ssr", None) or {})
            for key in ("scales", "overlaps"):
                if key in ssr:
                    ssr[key] = tuple(ssr[key])
            cfg = cls(
                spec_path=path(doc.pop("spec_path", None)),
                rtl_paths=[base_dir / p for p in doc.pop("rtl_paths", None) or []],
                include_dirs=[base_dir / p for p in doc.pop("include_dirs", None) or []],
                schema_path=path(doc.pop("schema_path", None)),
                abbrev_path=path(doc.pop("abbrev_path", None)),
                run_dir=path(doc.pop("run_dir", None)) or cls.run_dir,
                cache_dir=path(doc.pop("cache_dir", None)),
                ssr=SsrSettings(**ssr),
                walk=WalkConfig(**walk),
                pruner=PrunerConfig(**(doc.pop("pruner", None) or {})),
                provider=ProviderSettings(**provider),
                **doc,
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid configuration: {exc}") from exc
        return cfg

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a mapping at the top level")
        return cls.from_dict(doc, path.parent)

    @property
    def cache_root(self) -> Path:
        return self.cache_dir or (self.run_dir / "cache")

    def validate(self, need_spec: bool = False, need_rtl: bool = False) -> "RunConfig":
        if need_spec and (self.spec_path is None or not Path(self.spec_path).is_file()):
            raise ConfigError(f"specification file not found: {self.spec_path}")
        if need_rtl:
            if not self.rtl_paths:
                raise ConfigError("no RTL files configured")
            for p in self.rtl_paths:
                if not Path(p).is_file():
                    raise ConfigError(f"RTL file not found: {p}")
        for p in self.include_dirs:
            if not Path(p).is_dir():
                raise ConfigError(f"include directory not found: {p}")
        for p in (self.schema_path, self.abbrev_path):
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"file not found: {p}")
        if self.provider.mock_dir and not Path(self.provider.mock_dir).is_dir():
            raise ConfigError(f"mock script directory not found: {self.provider.mock_dir}")
        if self.budget_B < 1 or self.workers < 1 or self.ssr.top_k < 1:
            raise ConfigError("budget_B, workers and ssr.top_k must be at least 1")
        if self.provider.context_window < 1:
            raise ConfigError("provider.context_window must be positive")
        try:
            self.ssr.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def snapshot(self) -> dict:
        def conv(v):
            if isinstance(v, Path):
                return str(v)
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            return v

        return conv(asdict(self))


# ---------------------------------------------------------------- helpers


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
    if isinstance(data, bytes):
        tmp.write_bytes(data)
    else:
        tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def content_hash(*parts) -> str:
    h = hashlib.sha256(STAGE_VERSION.encode())
    for part in parts:
        data = part if isinstance(part, bytes) else str(part).encode("utf-8")
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def relabel_files(design: RtlDesign, paths: Sequence[Path]) -> RtlDesign:
    """Rewrite source locations relative to the RTL files' common directory.

    Keeps artifacts independent of the working directory and of where the
    sources were checked out.
    """
    if not paths:
        return design
    resolved = [Path(p).resolve() for p in paths]
    base = Path(os.path.commonpath([str(p.parent) for p in resolved]))
    mapping = sorted(
        ((str(p), Path(os.path.relpath(r, base)).as_posix()) for p, r in zip(paths, resolved)),
        key=lambda kv: -len(kv[0]),
    )

    def fix(v):
        if isinstance(v, str):
            for old, new in mapping:
                if v == old or v.startswith(old + ":"):
                    return new + v[len(old):]
            return v
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        return v

    return RtlDesign.from_dict(fix(design.to_dict()))


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Counting(LlmProvider):
    """Counts calls and failures that reach the wrapped provider."""

    def __init__(self, inner: LlmProvider):
        self.inner = inner
        self.model_id = inner.model_id
        self.context_window = inner.context_window
        self.calls = 0
        self.errors = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str, max_output_tokens: int = 2048) -> str:
        with self._lock:
            self.calls += 1
        try:
            return self.inner.complete(prompt, max_output_tokens)
        except ProviderError:
            with self._lock:
                self.errors += 1
            raise

    def scripted(self, prompt: str) -> bool:
        return getattr(self.inner, "scripted", lambda p: True)(prompt)

    @property
    def is_mock(self) -> bool:
        return getattr(self.inner, "is_mock", False)


# ---------------------------------------------------------------- run context


@dataclass
class StageResult:
    name: str
    skipped: bool
    seconds: float
    artifacts: List[str]


class Run:
    """One invocation against a run directory; owns the provider and bookkeeping."""

    def __init__(self, cfg: RunConfig, force: bool = False, provider: Optional[LlmProvider] = None):
        self.cfg = cfg
        self.force = force
        self.dir = Path(cfg.run_dir)
        self._inner = provider
        self._llm: Optional[CachedProvider] = None
        self._counting: Optional[_Counting] = None
        self.stages: List[StageResult] = []
        self.counters: Dict[str, int] = {}
        self.warnings: List[str] = []

    # provider is created lazily so stages that need none work offline
    @property
    def llm(self) -> CachedProvider:
        if self._llm is None:
            inner = self._inner or build_provider(self.cfg.provider, log_dir=self.dir / "llm_log")
            self._counting = _Counting(inner)
            self._llm = CachedProvider(self._counting, self.cfg.cache_root / "llm")
        return self._llm

    def path(self, rel: str) -> Path:
        return self.dir / rel

    def _stage(self, name: str, key: str, outputs: Sequence[str], produce) -> bool:
        key_path = self.path(f".stages/{name}.key")
        t0 = time.perf_counter()
        fresh = (
            not self.force
            and key_path.exists()
            and key_path.read_text(encoding="utf-8").strip() == key
            and all(self.path(o).exists() for o in outputs)
        )
        if fresh:
            logger.info("stage %s: inputs unchanged, skipping", name)
        else:
            produce()
            write_atomic(key_path, key + "\n")
        self.stages.append(StageResult(name, fresh, time.perf_counter() - t0, list(outputs)))
        return fresh

    # ------------------------------------------------------------ stage 1: spec -> G0

    def build_kg(self) -> Graph:
        cfg = self.cfg.validate(need_spec=True)
        spec_text = Path(cfg.spec_path).read_text(encoding="utf-8")
        schema_text = Path(cfg.schema_path).read_text(encoding="utf-8") if cfg.schema_path else read_asset("schema.yaml")
        key = content_hash(
            "build-kg",
            spec_text,
            schema_text,
            read_asset("entity_extraction.txt"),
            cfg.extraction_chunk_tokens,
            cfg.extraction_overlap_tokens,
            self.llm.model_id,
        )
        outputs = ["kg/g0.json", "kg/extraction.json"]

        def produce():
            schema = load_schema(cfg.schema_path)
            doc = SpecDocument("spec", spec_text, str(cfg.spec_path))
            chunks = chunk_for_extraction(doc, cfg.extraction_chunk_tokens, cfg.extraction_overlap_tokens)
            records = extract_all(self.llm, schema, chunks, workers=cfg.workers)
            g0 = assemble_graph(records, schema, self.llm)
            log = [
                {
                    "chunk_id": r.chunk_id,
                    "entities": [list(e) for e in r.entities],
                    "relations": [list(x) for x in r.relations],
                    "dropped": r.dropped,
                    "skipped_lines": r.skipped_lines,
                }
                for r in records
            ]
            write_atomic(self.path("kg/extraction.json"), dumps(log))
            write_atomic(self.path("kg/g0.json"), serialize(g0))

        self._stage("build-kg", key, outputs, produce)
        return deserialize(self.path("kg/g0.json").read_bytes())

    # ------------------------------------------------------------ stage 2: G0 + RTL -> G

    def _rtl_texts(self) -> Dict[str, str]:
        return preprocess_includes(self.cfg.rtl_paths, self.cfg.include_dirs)

    def refine_kg(self) -> Tuple[Graph, RtlDesign]:
        cfg = self.cfg.validate(need_rtl=True)
        g0_path = self.path("kg/g0.json")
        if not g0_path.exists():
            raise ConfigError(f"{g0_path} not found; run 'kgsva build-kg' first")
        abbrev_text = Path(cfg.abbrev_path).read_text(encoding="utf-8") if cfg.abbrev_path else read_asset("abbreviations.yaml")
        texts = self._rtl_texts()
        key = content_hash(
            "refine-kg", g0_path.read_bytes(), cfg.top_module, abbrev_text,
            *[f"{Path(p).name}\0{t}" for p, t in sorted(texts.items())],
        )
        outputs = ["kg/graph.json", "rtl_design.json", "match_report.json", "rtl_warnings.json"]

        def produce():
            warnings: List[str] = []
            design = relabel_files(build_design(cfg.rtl_paths, cfg.include_dirs, cfg.top_module, warnings), cfg.rtl_paths)
            g0 = deserialize(g0_path.read_bytes())
            g, matches, audit = refine(g0, design, AbbrevDict.load(cfg.abbrev_path))
            write_atomic(self.path("rtl_design.json"), dumps(design.to_dict()))
            write_atomic(
                self.path("match_report.json"),
                dumps({"links": [m.to_dict() for m in matches], "candidates": audit}),
            )
            write_atomic(self.path("rtl_warnings.json"), dumps(warnings))
            write_atomic(self.path("kg/graph.json"), serialize(g))

        self._stage("refine-kg", key, outputs, produce)
        return self.load_graph(), self.load_design()

    def load_graph(self) -> Graph:
        p = self.path("kg/graph.json")
        if not p.exists():
            raise ConfigError(f"{p} not found; run 'kgsva refine-kg' first")
        return deserialize(p.read_bytes())

    def load_design(self) -> RtlDesign:
        p = self.path("rtl_design.json")
        if not p.exists():
            raise ConfigError(f"{p} not found; run 'kgsva refine-kg' first")
        return RtlDesign.from_dict(json.loads(p.read_text(encoding="utf-8")))

    # ------------------------------------------------------------ stage 3: architectural signals

    def extract_signals(self) -> List[str]:
        graph_bytes = self.path("kg/graph.json").read_bytes() if self.path("kg/graph.json").exists() else b""
        design_path = self.path("rtl_design.json")
        if not design_path.exists() or not graph_bytes:
            raise ConfigError("graph or RTL design missing; run 'kgsva refine-kg' first")
        key = content_hash("extract-signals", graph_bytes, design_path.read_bytes(), self.cfg.top_module)

        def produce():
            design = self.load_design()
            signals = sorted(extract_valid_signals(design, self.cfg.top_module, deserialize(graph_bytes)))
            write_atomic(self.path("signals.json"), dumps({"top": self.cfg.top_module or design.top, "signals": signals}))

        self._stage("extract-signals", key, ["signals.json"], produce)
        return json.loads(self.path("signals.json").read_text(encoding="utf-8"))["signals"]

    # ------------------------------------------------------------ stage 4: per-signal generation

    def generate(self) -> dict:
        cfg = self.cfg.validate(need_spec=True, need_rtl=True)
        t0 = time.perf_counter()
        self.build_kg()
        g, design = self.refine_kg()
        valid = self.extract_signals()
        targets = valid
        if cfg.signals:
            unknown = sorted(set(cfg.signals) - set(valid))
            if unknown:
                raise ConfigError(f"not architectural signals: {', '.join(unknown)} (valid: {', '.join(valid)})")
            targets = [s for s in valid if s in set(cfg.signals)]
        if not targets:
            raise EmptyResultError("no architectural signals to process")

        spec_text = Path(cfg.spec_path).read_text(encoding="utf-8")
        rtl_files = [(Path(p).name, Path(p).read_text(encoding="utf-8")) for p in cfg.rtl_paths]
        rtl_text = "\n".join(f"// file: {name}\n{text}" for name, text in rtl_files)

        t = time.perf_counter()
        docs = [SourceDoc("spec", spec_text, "spec")] + [SourceDoc(n, txt, "rtl") for n, txt in rtl_files]
        index = load_or_build(docs, cfg.cache_root / "ssr", cfg.ssr.grid(), force=self.force, workers=cfg.workers)
        self.stages.append(StageResult("ssr-index", False, time.perf_counter() - t, []))

        t = time.perf_counter()
        summaries = generate_global_summaries(self.llm, spec_text, rtl_text, valid)
        write_atomic(self.path("summaries.json"), dumps([s.to_dict() for s in summaries]))
        self.stages.append(StageResult("summaries", False, time.perf_counter() - t, ["summaries.json"]))

        top = cfg.top_module or design.top
        arch_nodes = sorted(signal_id(top, s) for s in valid if signal_id(top, s) in g.nodes)
        hops = next_hop_table(g, arch_nodes)
        walk_cfg = replace(cfg.walk, seed=cfg.seed)
        scopes = sorted(set(design.modules) | {i.instance_name for m in design.modules.values() for i in m.instances})
        examples_plan = read_asset("plan_examples.txt").strip()
        reserve = approx_count(
            render(read_asset("sva.txt"), examples=read_asset("sva_examples.txt").strip(), plans="x" * 2048)
        ) + approx_count(", ".join(valid))
        ctx = _SignalContext(
            g, index, summaries, spec_text, rtl_text, valid, arch_nodes, hops, walk_cfg, scopes, top, examples_plan, reserve
        )

        t = time.perf_counter()
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(lambda s: self._one_signal(ctx, s), targets))
        self.stages.append(StageResult("signals", False, time.perf_counter() - t, []))

        records: List[SvaRecord] = []
        failed: Dict[str, str] = {}
        for sig, (recs, err) in zip(targets, outcomes):
            records.extend(recs)
            if err:
                failed[sig] = err
        report = batch_report(records, valid, scopes)
        write_atomic(self.path("report.json"), report.to_json())
        write_atomic(self.path("report.txt"), report.to_table())

        self.counters.update(
            signals_processed=len(targets),
            signals_failed=len(failed),
            provider_calls=self._counting.calls if self._counting else 0,
            provider_errors=self._counting.errors if self._counting else 0,
            cache_hits=self.llm.hits,
            cache_misses=self.llm.misses,
        )
        self.warnings.extend(f"{s}: {why}" for s, why in sorted(failed.items()))
        self.write_manifest(time.perf_counter() - t0, targets)

        if len(failed) == len(targets):
            if self.counters["provider_errors"]:
                raise ProviderFailure("every signal failed; the provider reported errors")
            raise EmptyResultError("every signal failed to produce an assertion")
        return report.to_dict()

    def _one_signal(self, ctx: "_SignalContext", sig: str) -> Tuple[List[SvaRecord], Optional[str]]:
        try:
            return self._signal_pipeline(ctx, sig)
        except Exception as exc:  # isolate per-signal failures
            logger.exception("signal %s failed", sig)
            return [], f"{type(exc).__name__}: {exc}"

    def _signal_pipeline(self, ctx: "_SignalContext", sig: str) -> Tuple[List[SvaRecord], Optional[str]]:
        cfg = self.cfg
        out = f"signals/{sig}"
        desc = generate_signal_description(self.llm, sig, ctx.spec_text, ctx.rtl_text, ctx.valid)

        rag = chunks_to_contexts(retrieve(ctx.index, sig, cfg.ssr.top_k), sig)

        start = signal_id(ctx.top, sig)
        walk_items: List[ContextItem] = []
        walk_dump = []
        if start in ctx.g.nodes:
            others = max(1, len(ctx.arch_nodes) - 1)
            paths = run_walks(ctx.g, start, ctx.arch_nodes, ctx.walk_cfg, ctx.hops)
            for k, p in enumerate(paths):
                walk_dump.append(p.to_dict())
                text = path_to_text(ctx.g, p).render()
                walk_items.append(ContextItem("kg_path", text, len(p.discovered_signals) / others, f"walk {k}", sig))
        else:
            logger.warning("no graph node for %s; skipping walks", sig)
        write_atomic(self.path(f"{out}/walks.json"), dumps(walk_dump))

        candidates = rag + walk_items
        pruned = prune(self.llm, sig, f"Verification context for signal {sig}", candidates, cfg.pruner)
        write_atomic(
            self.path(f"{out}/contexts.json"),
            dumps(
                {
                    "signal_desc": desc.to_dict(),
                    "candidates": [c.to_dict() for c in candidates],
                    "pruned": [c.to_dict() for c in pruned],
                }
            ),
        )

        bundle = assemble_prompts(
            sig,
            list(ctx.summaries) + [desc],
            pruned,
            token_limit_for(self.llm.context_window),
            cfg.budget_B,
            reserve_tokens=ctx.reserve,
        )
        write_atomic(self.path(f"{out}/prompts.json"), dumps(bundle.to_dict()))

        stats = PlanStats()
        plans = generate_plans(self.llm, bundle, ctx.valid, ctx.examples_plan, stats)
        write_atomic(
            self.path(f"{out}/plans.json"),
            dumps({"plans": [{"prompt_ordinal": o, "plan": p} for o, p in plans], "stats": asdict(stats)}),
        )
        records = generate_svas(self.llm, bundle, plans, desc.text) if plans else []
        for rec in records:
            apply_check(rec, ctx.valid, ctx.scopes)
        write_atomic(self.path(f"{out}/svas.json"), dumps([r.to_dict() for r in records]))
        if not records:
            return [], "no assertions generated"
        return records, None

    # ------------------------------------------------------------ manifest

    def input_hashes(self) -> Dict[str, str]:
        out = {}
        paths = ([self.cfg.spec_path] if self.cfg.spec_path else []) + list(self.cfg.rtl_paths)
        for p in paths + [self.cfg.schema_path, self.cfg.abbrev_path]:
            if p is not None and Path(p).is_file():
                out[str(p)] = _file_digest(Path(p))
        return out

    def write_manifest(self, seconds: float, signals: Sequence[str]) -> None:
        artifacts = sorted(
            str(p.relative_to(self.dir))
            for p in self.dir.rglob("*")
            if p.is_file() and not p.relative_to(self.dir).parts[0] in ("cache", ".stages", "llm_log")
            and p.name != "manifest.json"
        )
        manifest = {
            "config": self.cfg.snapshot(),
            "input_hashes": self.input_hashes(),
            "signals": list(signals),
            "artifacts": artifacts,
            "counters": dict(sorted(self.counters.items())),
            "warnings": self.warnings,
            "stages": [asdict(s) for s in self.stages],
            "total_seconds": seconds,
        }
        write_atomic(self.path("manifest.json"), dumps(manifest))


@dataclass
class _SignalContext:
    g: Graph
    index: Any
    summaries: List[ContextItem]
    spec_text: str
    rtl_text: str
    valid: List[str]
    arch_nodes: List[str]
    hops: Any
    walk_cfg: WalkConfig
    scopes: List[str]
    top: str
    examples_plan: str
    reserve: int


def load_report(run_dir: Path) -> dict:
    run_dir = Path(run_dir)
    if not (run_dir / "manifest.json").exists():
        raise ConfigError(f"{run_dir} has no manifest.json; is it a completed run directory?")
    report = run_dir / "report.json"
    if not report.exists():
        raise ConfigError(f"{report} is missing")
    return json.loads(report.read_text(encoding="utf-8"))

"""Command-line entry point: ``kgsva <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 parse error (RTL, includes,
graph files), 4 provider failure, 5 empty result.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .graph import GraphError
from .llm import ProviderError
from .pipeline import ConfigError, EmptyResultError, ProviderFailure, Run, RunConfig, load_report
from .rtl import RtlParseError
from .rtl.analysis import IncludeError, UnknownTopError
from .rtl.lexer import LexError
from .sva import BatchReport

logger = logging.getLogger("kgsva")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_PROVIDER = 4
EXIT_EMPTY = 5


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", type=Path, help="YAML run configuration")
    p.add_argument("--run-dir", type=Path, help="output directory (default: ./run)")
    p.add_argument("--cache-dir", type=Path, help="LLM reply and index cache (default: <run-dir>/cache)")
    p.add_argument("--spec", type=Path, help="specification text file")
    p.add_argument("--rtl", type=Path, action="append", help="Verilog source (repeatable)")
    p.add_argument("-I", "--include-dir", type=Path, action="append", help="`include search directory")
    p.add_argument("--top", help="top module name")
    p.add_argument("--mock", type=Path, metavar="SCRIPT_DIR", help="use the scripted mock provider")
    p.add_argument("--force", action="store_true", help="ignore stage and index caches")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)


def _add_generate_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--signals", help="comma-separated subset of architectural signals")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--walks", type=int, help="walks per signal")
    p.add_argument("--step-budget", type=int, help="maximum steps per walk")
    p.add_argument("--prompts", type=int, help="maximum prompts per signal (B)")
    p.add_argument("--top-k", type=int, help="retrieval results per signal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgsva", description="Knowledge-graph-guided SVA generation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("build-kg", "extract the initial graph from the specification"),
        ("refine-kg", "parse the RTL and merge it into the graph"),
        ("extract-signals", "list the architectural signals"),
    ):
        _add_run_options(sub.add_parser(name, help=help_text))
    gen = sub.add_parser("generate", help="run every stage and generate plans and assertions")
    _add_run_options(gen)
    _add_generate_options(gen)

    rep = sub.add_parser("report", help="print the #SVA/#SynC table of a finished run")
    rep.add_argument("run_dir", type=Path)
    rep.add_argument("--json", action="store_true", help="print the machine-readable report instead")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {}
    if args.run_dir:
        overrides["run_dir"] = args.run_dir
    if args.cache_dir:
        overrides["cache_dir"] = args.cache_dir
    if args.spec:
        overrides["spec_path"] = args.spec
    if args.rtl:
        overrides["rtl_paths"] = list(args.rtl)
    if args.include_dir:
        overrides["include_dirs"] = list(args.include_dir)
    if args.top:
        overrides["top_module"] = args.top
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mock:
        overrides["provider"] = replace(cfg.provider, kind="mock", mock_dir=str(args.mock))
    if getattr(args, "signals", None):
        overrides["signals"] = [s.strip() for s in args.signals.split(",") if s.strip()]
    if getattr(args, "prompts", None) is not None:
        overrides["budget_B"] = args.prompts
    if getattr(args, "top_k", None) is not None:
        overrides["ssr"] = replace(cfg.ssr, top_k=args.top_k)
    walk = {
        key: getattr(args, attr)
        for key, attr in (
            ("alpha", "alpha"),
            ("beta", "beta"),
            ("gamma", "gamma"),
            ("walks_per_signal", "walks"),
            ("step_budget", "step_budget"),
        )
        if getattr(args, attr, None) is not None
    }
    try:
        if walk:
            overrides["walk"] = replace(cfg.walk, **walk)
        return replace(cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run(args: argparse.Namespace) -> int:
    if args.command == "report":
        report = BatchReport.from_dict(load_report(args.run_dir))
        sys.stdout.write(report.to_json() if args.json else report.to_table())
        return EXIT_OK

    run = Run(config_from_args(args), force=args.force)
    if args.command == "build-kg":
        g0 = run.build_kg()
        print(f"G0: {len(g0.nodes)} nodes, {len(g0.edges)} edges -> {run.path('kg/g0.json')}")
    elif args.command == "refine-kg":
        g, design = run.refine_kg()
        links = json.loads(run.path("match_report.json").read_text(encoding="utf-8"))["links"]
        print(f"G: {len(g.nodes)} nodes, {len(g.edges)} edges, {len(links)} spec links, top {design.top}")
    elif args.command == "extract-signals":
        if not run.path("kg/graph.json").exists():
            run.build_kg()
            run.refine_kg()
        print("\n".join(run.extract_signals()))
    elif args.command == "generate":
        run.generate()
        sys.stdout.write(run.path("report.txt").read_text(encoding="utf-8"))
        print(f"artifacts in {run.dir}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (ConfigError, UnknownTopError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RtlParseError, LexError, IncludeError, GraphError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ProviderError, ProviderFailure) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except EmptyResultError as exc:
        print(f"empty result: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())

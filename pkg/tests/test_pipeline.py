import json
from dataclasses import replace
from pathlib import Path

import pytest

from kgsva.llm import MockProvider
from kgsva.pipeline import ConfigError, Run, RunConfig
from helpers import UART_DIR


def config(run_dir, **kw):
    return replace(RunConfig.load(UART_DIR / "config.yaml"), run_dir=Path(run_dir), **kw)


def test_config_paths_resolve_against_file():
    cfg = RunConfig.load(UART_DIR / "config.yaml")
    assert cfg.spec_path == UART_DIR / "uart_spec.txt"
    assert cfg.rtl_paths[0] == UART_DIR / "baud_gen.v"
    assert Path(cfg.provider.mock_dir) == UART_DIR / "mock"
    assert cfg.ssr.grid().pairs()[0] == (50, 0.2)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"walk": {"alpha": -1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"nope": 1})
    with pytest.raises(ConfigError):
        RunConfig(spec_path=tmp_path / "missing.txt").validate(need_spec=True, need_rtl=False)


def test_rerun_uses_caches(tmp_path):
    first = Run(config(tmp_path / "r", signals=["tx_busy"]))
    report = first.generate()
    assert first.counters["provider_calls"] > 0
    second = Run(config(tmp_path / "r", signals=["tx_busy"]))
    assert second.generate() == report
    assert second.counters["provider_calls"] == 0
    skipped = {s.name: s.skipped for s in second.stages}
    assert skipped["build-kg"] and skipped["refine-kg"] and skipped["extract-signals"]
    forced = Run(config(tmp_path / "r", signals=["tx_busy"]), force=True)
    forced.generate()
    assert not {s.name: s.skipped for s in forced.stages}["build-kg"]


def test_run_dir_layout(tmp_path):
    run = Run(config(tmp_path / "r", signals=["tx_busy", "new_rx_data"]))
    run.generate()
    root = tmp_path / "r"
    for rel in ("kg/g0.json", "kg/graph.json", "kg/extraction.json", "rtl_design.json", "match_report.json",
                "signals.json", "summaries.json", "report.json", "report.txt", "manifest.json"):
        assert (root / rel).is_file(), rel
    for sig in ("tx_busy", "new_rx_data"):
        for name in ("walks", "contexts", "prompts", "plans", "svas"):
            assert (root / "signals" / sig / f"{name}.json").is_file()
    svas = json.loads((root / "signals" / "tx_busy" / "svas.json").read_text())
    assert svas and all("syntax_ok" in r for r in svas)
    manifest = json.loads((root / "manifest.json").read_text())
    assert manifest["signals"] == ["new_rx_data", "tx_busy"]
    assert str(tmp_path) not in (root / "rtl_design.json").read_text()


def test_mock_script_edit_invalidates_cache(tmp_path):
    scripts = tmp_path / "mock"
    scripts.mkdir()
    for p in (UART_DIR / "mock").glob("*.yaml"):
        (scripts / p.name).write_text(p.read_text())
    a = MockProvider.from_dir(scripts).model_id
    (scripts / "99_extra.yaml").write_text("rules: []\n")
    assert MockProvider.from_dir(scripts).model_id != a


"""Text-completion providers: an HTTP chat client, a scripted mock, and a disk cache.

Nothing outside this module talks to the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
import threading
import time
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONTEXT_WINDOW = 128000


class ProviderError(Exception):
    """Base class for completion failures."""


class AuthError(ProviderError):
    pass


class RateLimitError(ProviderError):
    pass


class MalformedResponseError(ProviderError):
    pass


def approx_count(text: str) -> int:
    """Token estimate: the larger of the word count and ``ceil(chars / 4)``."""
    if not text:
        return 0
    return max(len(text.split()), math.ceil(len(text) / 4))


class ApproxTokenCounter:
    def count(self, text: str) -> int:
        return approx_count(text)


class LlmProvider:
    model_id: str = "unknown"
    context_window: int = DEFAULT_CONTEXT_WINDOW

    def complete(self, prompt: str, max_output_tokens: int = 2048) -> str:
        raise NotImplementedError


def fingerprint(prompt: str, prefix_chars: int = 2000) -> str:
    norm = " ".join(prompt.split())[:prefix_chars]
    return hashlib.sha256(norm.encode("utf-8")).hexdigest()[:16]


@dataclass
class ScriptRule:
    """Reply with ``reply`` when every string in ``match`` occurs in the prompt."""

    match: List[str]
    reply: str

    def applies(self, prompt: str) -> bool:
        return all(m in prompt for m in self.match)


class MockProvider(LlmProvider):
    """Deterministic provider driven by fingerprint entries and substring rules.

    Fingerprint entries win over rules; rules are tried in order.  Anything
    unscripted gets an echo reply embedding the prompt fingerprint.
    """

    is_mock = True

    def __init__(
        self,
        script: Optional[Dict[str, str]] = None,
        rules: Optional[List[ScriptRule]] = None,
        model_id: str = "mock",
        context_window: int = DEFAULT_CONTEXT_WINDOW,
        prefix_chars: int = 2000,
        fail_on: Optional[List[str]] = None,
    ):
        self.script = dict(script or {})
        self.rules = list(rules or [])
        self.model_id = model_id
        self.context_window = context_window
        self.prefix_chars = prefix_chars
        self.fail_on = list(fail_on or [])
        self.calls: Counter = Counter()
        self.prompts: List[str] = []
        self._lock = threading.Lock()

    @property
    def total_calls(self) -> int:
        return sum(self.calls.values())

    def scripted(self, prompt: str) -> bool:
        return fingerprint(prompt, self.prefix_chars) in self.script or any(
            r.applies(prompt) for r in self.rules
        )

    def complete(self, prompt: str, max_output_tokens: int = 2048) -> str:
        fp = fingerprint(prompt, self.prefix_chars)
        with self._lock:
            self.calls[fp] += 1
            self.prompts.append(prompt)
        if any(marker in prompt for marker in self.fail_on):
            raise ProviderError(f"scripted failure for prompt {fp}")
        if fp in self.script:
            return self.script[fp]
        for rule in self.rules:
            if rule.applies(prompt):
                return rule.reply
        return f"MOCK-ECHO {fp}"

    @classmethod
    def from_dir(cls, script_dir: Path, **kwargs) -> "MockProvider":
        """Load every ``*.yaml`` under ``script_dir`` (sorted) into one mock."""
        script: Dict[str, str] = {}
        rules: List[ScriptRule] = []
        digest = hashlib.sha256()
        for path in sorted(Path(script_dir).glob("*.yaml")):
            text = path.read_text(encoding="utf-8")
            digest.update(path.name.encode("utf-8") + b"\0" + text.encode("utf-8"))
            doc = yaml.safe_load(text) or {}
            script.update({str(k): str(v) for k, v in (doc.get("fingerprints") or {}).items()})
            for r in doc.get("rules") or []:
                match = r["match"]
                rules.append(ScriptRule([match] if isinstance(match, str) else list(match), str(r["reply"])))
        # the model id names the script contents so reply caches never outlive an edit
        kwargs.setdefault("model_id", f"mock-{digest.hexdigest()[:12]}")
        return cls(script, rules, **kwargs)


@dataclass
class HttpConfig:
    endpoint: str
    model_id: str
    api_key_env: str = "KGSVA_API_KEY"
    context_window: int = DEFAULT_CONTEXT_WINDOW
    max_in_flight: int = 4
    timeout_seconds: float = 120.0
    max_attempts: int = 3
    backoff_seconds: float = 1.0
    temperature: float = 0.0
    system_prompt: str = "You are an expert hardware verification engineer."
    log_dir: Optional[Path] = None


_SECRET_RE = re.compile(r"(Bearer\s+)\S+")


class HttpProvider(LlmProvider):
    """OpenAI-style chat completion client (one system + one user message)."""

    def __init__(self, cfg: HttpConfig):
        self.cfg = cfg
        self.model_id = cfg.model_id
        self.context_window = cfg.context_window
        self._slots = threading.BoundedSemaphore(max(1, cfg.max_in_flight))
        self._n_logged = 0
        self._log_lock = threading.Lock()

    def _api_key(self) -> str:
        key = os.environ.get(self.cfg.api_key_env, "")
        if not key:
            raise AuthError(f"environment variable {self.cfg.api_key_env} is not set")
        return key

    def complete(self, prompt: str, max_output_tokens: int = 2048) -> str:
        return http_complete(self, prompt, max_output_tokens)

    def _log(self, request: dict, response: str) -> None:
        if self.cfg.log_dir is None:
            return
        with self._log_lock:
            self._n_logged += 1
            n = self._n_logged
        self.cfg.log_dir.mkdir(parents=True, exist_ok=True)
        body = _SECRET_RE.sub(r"\1[REDACTED]", json.dumps({"request": request, "response": response}, indent=1))
        (self.cfg.log_dir / f"call_{n:05d}.json").write_text(body, encoding="utf-8")


def http_complete(provider: HttpProvider, prompt: str, max_output_tokens: int) -> str:
    cfg = provider.cfg
    key = provider._api_key()
    payload = {
        "model": cfg.model_id,
        "temperature": cfg.temperature,
        "max_tokens": max_output_tokens,
        "messages": [
            {"role": "system", "content": cfg.system_prompt},
            {"role": "user", "content": prompt},
        ],
    }
    data = json.dumps(payload).encode("utf-8")
    last_exc: Exception = ProviderError("no attempt made")
    for attempt in range(cfg.max_attempts):
        if attempt:
            time.sleep(cfg.backoff_seconds * 2 ** (attempt - 1))
        req = urllib.request.Request(
            cfg.endpoint,
            data=data,
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {key}"},
            method="POST",
        )
        try:
            with provider._slots:
                with urllib.request.urlopen(req, timeout=cfg.timeout_seconds) as resp:
                    raw = resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code in (401, 403):
                raise AuthError(f"endpoint rejected credentials (HTTP {exc.code})") from exc
            if exc.code == 429:
                last_exc = RateLimitError(f"rate limited after {attempt + 1} attempt(s)")
                continue
            if exc.code >= 500:
                last_exc = ProviderError(f"server error HTTP {exc.code}")
                continue
            raise ProviderError(f"HTTP {exc.code}") from exc
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            last_exc = ProviderError(f"connection failed: {exc}")
            continue
        text = _extract_text(raw)
        provider._log(payload, text)
        return text
    raise last_exc


def _extract_text(raw: bytes) -> str:
    try:
        doc = json.loads(raw)
        content = doc["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponseError(f"unexpected response shape: {raw[:200]!r}") from exc
    if not isinstance(content, str):
        raise MalformedResponseError("response content is not text")
    return content


class CachedProvider(LlmProvider):
    """Wraps a provider with a content-addressed reply cache.

    Keys hash the model id and full prompt.  With ``cache_dir`` set, replies
    persist across runs as one JSON file per key; identical keys written
    concurrently resolve last-writer-wins.
    """

    def __init__(self, inner: LlmProvider, cache_dir: Optional[Path] = None):
        self.inner = inner
        self.model_id = inner.model_id
        self.context_window = inner.context_window
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._mem: Dict[str, str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def key(self, prompt: str) -> str:
        h = hashlib.sha256()
        h.update(self.model_id.encode("utf-8"))
        h.update(b"\0")
        h.update(prompt.encode("utf-8"))
        return h.hexdigest()

    def _lookup(self, key: str) -> Optional[str]:
        if key in self._mem:
            return self._mem[key]
        if self.cache_dir is not None:
            path = self.cache_dir / key[:2] / f"{key}.json"
            if path.exists():
                reply = json.loads(path.read_text(encoding="utf-8"))["reply"]
                self._mem[key] = reply
                return reply
        return None

    def complete(self, prompt: str, max_output_tokens: int = 2048) -> str:
        key = self.key(prompt)
        with self._lock:
            cached = self._lookup(key)
            if cached is not None:
                self.hits += 1
                return cached
        reply = self.inner.complete(prompt, max_output_tokens)
        with self._lock:
            self.misses += 1
            self._mem[key] = reply
            if self.cache_dir is not None:
                path = self.cache_dir / key[:2] / f"{key}.json"
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(f".{threading.get_ident()}.tmp")
                tmp.write_text(json.dumps({"reply": reply}), encoding="utf-8")
                os.replace(tmp, path)
        return reply

    def scripted(self, prompt: str) -> bool:
        return getattr(self.inner, "scripted", lambda p: True)(prompt)

    @property
    def is_mock(self) -> bool:
        return getattr(self.inner, "is_mock", False)


@dataclass
class ProviderSettings:
    """Provider section of the run configuration."""

    kind: str = "http"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model_id: str = "gpt-4o"
    api_key_env: str = "KGSVA_API_KEY"
    context_window: int = DEFAULT_CONTEXT_WINDOW
    max_in_flight: int = 4
    timeout_seconds: float = 120.0
    mock_dir: Optional[str] = None


def build_provider(settings: ProviderSettings, log_dir: Optional[Path] = None) -> LlmProvider:
    if settings.kind == "mock" or settings.mock_dir:
        if not settings.mock_dir:
            return MockProvider(context_window=settings.context_window)
        return MockProvider.from_dir(Path(settings.mock_dir), context_window=settings.context_window)
    return HttpProvider(
        HttpConfig(
            endpoint=settings.endpoint,
            model_id=settings.model_id,
            api_key_env=settings.api_key_env,
            context_window=settings.context_window,
            max_in_flight=settings.max_in_flight,
            timeout_seconds=settings.timeout_seconds,
            log_dir=log_dir,
        )
    )

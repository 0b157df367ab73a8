"""Clients for translation and paraphrase model servers, plus offline mocks.

Real model servers sit behind a small JSON-over-HTTP contract (see README);
deterministic in-process mocks implement the same interface so every pipeline
runs with zero external dependencies. A file-per-entry disk cache can wrap any
backend, making re-runs free and diffable.

Wire contract (UTF-8 JSON bodies, POST):
  {endpoint}/translate   {"text", "src", "tgt"[, beam params]} -> {"result": str}
                         with beam params -> {"candidates": [str, ...]}
  {endpoint}/paraphrase  {"text", "lang", "num_beams", "num_return_sequences",
                          "early_stopping"} -> {"candidates": [str, ...]}
  {endpoint}/health      GET -> any 2xx
"""

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

import requests

KIND_TRANSLATE = "translate"
KIND_PARAPHRASE = "paraphrase"
_KINDS = (KIND_TRANSLATE, KIND_PARAPHRASE)

_BACKOFF_INITIAL = 0.25


class TransportError(RuntimeError):
    """Network-level failure (connect/timeout) that survived all retries."""


class BackendError(RuntimeError):
    """The backend answered, but unusably: non-2xx, empty or malformed result."""


@dataclass(frozen=True)
class BeamParams:
    """Decoding-diversity knobs forwarded verbatim to paraphrase backends."""

    num_beams: int = 4
    num_return_sequences: int = 1
    early_stopping: bool = True

    def __post_init__(self):
        if self.num_beams < 1:
            raise ValueError(f"num_beams must be >= 1, got {self.num_beams}")
        if self.num_return_sequences < 1:
            raise ValueError(
                f"num_return_sequences must be >= 1, got {self.num_return_sequences}"
            )
        if self.num_return_sequences > self.num_beams:
            raise ValueError(
                f"num_return_sequences ({self.num_return_sequences}) must not exceed "
                f"num_beams ({self.num_beams})"
            )

    def to_json_obj(self) -> dict:
        return {
            "num_beams": self.num_beams,
            "num_return_sequences": self.num_return_sequences,
            "early_stopping": self.early_stopping,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BeamParams":
        return cls(
            num_beams=obj["num_beams"],
            num_return_sequences=obj["num_return_sequences"],
            early_stopping=obj["early_stopping"],
        )


@dataclass(frozen=True)
class BackendConfig:
    id: str
    kind: str
    endpoint: str
    timeout: float = 30.0
    max_retries: int = 3
    cache_dir: Path | None = None
    bearer_token: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("backend id must be non-empty")
        if self.kind not in _KINDS:
            raise ValueError(f"backend kind must be one of {_KINDS}, got {self.kind!r}")
        scheme = urlsplit(self.endpoint).scheme
        if scheme not in ("http", "https", "mock"):
            raise ValueError(f"unsupported endpoint {self.endpoint!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def _dedup(candidates: list[str]) -> list[str]:
    return list(dict.fromkeys(candidates))


class Backend:
    """Shared surface: kind guards, candidate dedup/cap, empty-result checks."""

    def __init__(self, config: BackendConfig):
        self.config = config

    def _require_kind(self, kind: str) -> None:
        if self.config.kind != kind:
            raise ValueError(
                f"backend {self.config.id!r} has kind {self.config.kind!r}, "
                f"operation requires {kind!r}"
            )

    def translate(self, text: str, src_lang: str, tgt_lang: str) -> str:
        self._require_kind(KIND_TRANSLATE)
        if not text.strip():
            raise ValueError("translate requires non-empty text")
        result = self._translate(text, src_lang, tgt_lang)
        if not result.strip():
            raise BackendError(f"backend {self.config.id!r} returned empty translation")
        return result

    def translate_beams(
        self, text: str, src_lang: str, tgt_lang: str, params: BeamParams
    ) -> list[str]:
        """Translation with beam diversity: up to num_return_sequences variants."""
        self._require_kind(KIND_TRANSLATE)
        if not text.strip():
            raise ValueError("translate_beams requires non-empty text")
        candidates = self._translate_beams(text, src_lang, tgt_lang, params)
        candidates = _dedup(candidates)[: params.num_return_sequences]
        if not candidates:
            raise BackendError(f"backend {self.config.id!r} returned no candidates")
        return candidates

    def paraphrase(self, text: str, lang: str, params: BeamParams) -> list[str]:
        self._require_kind(KIND_PARAPHRASE)
        if not text.strip():
            raise ValueError("paraphrase requires non-empty text")
        candidates = self._paraphrase(text, lang, params)
        candidates = _dedup(candidates)[: params.num_return_sequences]
        if not candidates:
            raise BackendError(f"backend {self.config.id!r} returned no candidates")
        return candidates

    def health(self) -> float:
        """Round-trip the backend's health probe; returns latency in seconds."""
        start = time.perf_counter()
        self._health()
        return time.perf_counter() - start

    # subclass hooks
    def _translate(self, text: str, src_lang: str, tgt_lang: str) -> str:
        raise NotImplementedError

    def _translate_beams(
        self, text: str, src_lang: str, tgt_lang: str, params: BeamParams
    ) -> list[str]:
        raise NotImplementedError

    def _paraphrase(self, text: str, lang: str, params: BeamParams) -> list[str]:
        raise NotImplementedError

    def _health(self) -> None:
        raise NotImplementedError


class HttpBackend(Backend):
    """requests-based client with exponential backoff on transport errors/5xx."""

    def __init__(self, config: BackendConfig, sleep: Callable[[float], None] = time.sleep):
        super().__init__(config)
        self._session = requests.Session()
        self._sleep = sleep

    def _url(self, path: str) -> str:
        return self.config.endpoint.rstrip("/") + path

    def _headers(self) -> dict:
        if self.config.bearer_token:
            return {"Authorization": f"Bearer {self.config.bearer_token}"}
        return {}

    def _post(self, path: str, payload: dict) -> dict:
        attempts = 0
        delay = _BACKOFF_INITIAL
        last_failure: Exception | None = None
        while attempts <= self.config.max_retries:
            attempts += 1
            try:
                resp = self._session.post(
                    self._url(path),
                    json=payload,
                    timeout=self.config.timeout,
                    headers=self._headers(),
                )
            except requests.RequestException as exc:
                last_failure = TransportError(
                    f"backend {self.config.id!r}: {exc.__class__.__name__}: {exc}"
                )
            else:
                if 200 <= resp.status_code < 300:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise BackendError(
                            f"backend {self.config.id!r}: non-JSON response: {exc}"
                        ) from exc
                body = resp.text[:200]
                failure = BackendError(
                    f"backend {self.config.id!r}: HTTP {resp.status_code}: {body}"
                )
                if resp.status_code < 500:
                    raise failure  # client errors are not transient
                last_failure = failure
            if attempts <= self.config.max_retries:
                self._sleep(delay * (1.0 + random.random() * 0.25))
                delay *= 2
        assert last_failure is not None
        raise last_failure

    def _translate(self, text: str, src_lang: str, tgt_lang: str) -> str:
        obj = self._post("/translate", {"text": text, "src": src_lang, "tgt": tgt_lang})
        result = obj.get("result")
        if not isinstance(result, str):
            raise BackendError(f"backend {self.config.id!r}: missing 'result' field")
        return result

    def _translate_beams(self, text, src_lang, tgt_lang, params) -> list[str]:
        payload = {"text": text, "src": src_lang, "tgt": tgt_lang, **params.to_json_obj()}
        obj = self._post("/translate", payload)
        return self._candidates_of(obj)

    def _paraphrase(self, text, lang, params) -> list[str]:
        payload = {"text": text, "lang": lang, **params.to_json_obj()}
        obj = self._post("/paraphrase", payload)
        return self._candidates_of(obj)

    def _candidates_of(self, obj: dict) -> list[str]:
        candidates = obj.get("candidates")
        if candidates is None and isinstance(obj.get("result"), str):
            candidates = [obj["result"]]
        if not isinstance(candidates, list) or not all(
            isinstance(c, str) for c in candidates
        ):
            raise BackendError(f"backend {self.config.id!r}: missing 'candidates' field")
        return candidates

    def _health(self) -> None:
        try:
            resp = self._session.get(
                self._url("/health"), timeout=self.config.timeout, headers=self._headers()
            )
        except requests.RequestException as exc:
            raise TransportError(f"backend {self.config.id!r}: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise BackendError(
                f"backend {self.config.id!r}: health returned HTTP {resp.status_code}"
            )


class MockBackend(Backend):
    """Base for the in-tree deterministic mocks; counts simulated network calls."""

    expected_kind = KIND_TRANSLATE

    def __init__(self, config: BackendConfig):
        if config.kind != self.expected_kind:
            raise ValueError(
                f"mock endpoint {config.endpoint!r} implements kind "
                f"{self.expected_kind!r}, config says {config.kind!r}"
            )
        super().__init__(config)
        self.calls = 0

    def _health(self) -> None:
        self.calls += 1


_MARKER_OPEN = "⟦"  # ⟦
_MARKER_CLOSE = "⟧"  # ⟧


def strip_marker(text: str) -> str:
    """Remove a leading ``⟦xx⟧`` language marker if present."""
    if text.startswith(_MARKER_OPEN):
        end = text.find(_MARKER_CLOSE)
        if end != -1:
            return text[end + 1 :]
    return text


class IdentityTranslate(MockBackend):
    """Returns its input unchanged; the fixed-point backend for sanity checks."""

    expected_kind = KIND_TRANSLATE

    def _translate(self, text, src_lang, tgt_lang):
        self.calls += 1
        return text

    def _translate_beams(self, text, src_lang, tgt_lang, params):
        self.calls += 1
        return [text]


class TaggingTranslate(MockBackend):
    """Prefixes a reversible ``⟦tgt⟧`` marker; beams append distinct suffixes."""

    expected_kind = KIND_TRANSLATE

    def _translate(self, text, src_lang, tgt_lang):
        self.calls += 1
        return f"{_MARKER_OPEN}{tgt_lang}{_MARKER_CLOSE}{strip_marker(text)}"

    def _translate_beams(self, text, src_lang, tgt_lang, params):
        self.calls += 1
        base = f"{_MARKER_OPEN}{tgt_lang}{_MARKER_CLOSE}{strip_marker(text)}"
        return [base] + [
            f"{base} ⟨{i}⟩" for i in range(2, params.num_return_sequences + 1)
        ]


class EchoParaphrase(MockBackend):
    """Paraphrase mock that returns the input as its only candidate."""

    expected_kind = KIND_PARAPHRASE

    def _paraphrase(self, text, lang, params):
        self.calls += 1
        return [text]


class RotateParaphrase(MockBackend):
    """Returns whitespace-token rotations of the input (rotation 1 first)."""

    expected_kind = KIND_PARAPHRASE

    def _paraphrase(self, text, lang, params):
        self.calls += 1
        tokens = text.split()
        out = []
        for r in range(1, params.num_return_sequences + 1):
            shift = r % len(tokens)
            out.append(" ".join(tokens[shift:] + tokens[:shift]))
        return out


class ResponseCache:
    """File-per-entry JSON cache with atomic writes and single-flight fills."""

    def __init__(self, cache_dir: Path):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._master = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._master:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def get_or_fill(self, key: str, fill: Callable[[], dict]) -> dict:
        path = self._path(key)
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        with self._lock_for(key):
            if path.exists():  # lost the race: another thread filled it
                return json.loads(path.read_text(encoding="utf-8"))
            value = fill()
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(value, ensure_ascii=False), encoding="utf-8")
            os.replace(tmp, path)
            return value


def _cache_key(parts: dict) -> str:
    blob = json.dumps(parts, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class CachedBackend(Backend):
    """Wraps another backend; identical requests hit the network exactly once."""

    def __init__(self, inner: Backend, cache_dir: Path):
        super().__init__(inner.config)
        self.inner = inner
        self.cache = ResponseCache(cache_dir)

    def _translate(self, text, src_lang, tgt_lang):
        key = _cache_key(
            {"backend": self.config.id, "op": "translate", "src": src_lang,
             "tgt": tgt_lang, "text": text}
        )
        obj = self.cache.get_or_fill(
            key, lambda: {"result": self.inner._translate(text, src_lang, tgt_lang)}
        )
        return obj["result"]

    def _translate_beams(self, text, src_lang, tgt_lang, params):
        key = _cache_key(
            {"backend": self.config.id, "op": "translate_beams", "src": src_lang,
             "tgt": tgt_lang, "text": text, "params": params.to_json_obj()}
        )
        obj = self.cache.get_or_fill(
            key,
            lambda: {
                "candidates": self.inner._translate_beams(text, src_lang, tgt_lang, params)
            },
        )
        return obj["candidates"]

    def _paraphrase(self, text, lang, params):
        key = _cache_key(
            {"backend": self.config.id, "op": "paraphrase", "lang": lang,
             "text": text, "params": params.to_json_obj()}
        )
        obj = self.cache.get_or_fill(
            key, lambda: {"candidates": self.inner._paraphrase(text, lang, params)}
        )
        return obj["candidates"]

    def _health(self) -> None:
        self.inner._health()  # health is never cached


_MOCKS = {
    "identity": IdentityTranslate,
    "tag": TaggingTranslate,
    "echo": EchoParaphrase,
    "rotate": RotateParaphrase,
}


def build_backend(config: BackendConfig) -> Backend:
    """Instantiate the backend a config describes; mock: endpoints stay in-process."""
    scheme = urlsplit(config.endpoint).scheme
    if scheme == "mock":
        name = config.endpoint.split(":", 1)[1]
        cls = _MOCKS.get(name)
        if cls is None:
            raise ValueError(
                f"unknown mock backend {name!r}; available: {sorted(_MOCKS)}"
            )
        backend: Backend = cls(config)
    else:
        backend = HttpBackend(config)
    if config.cache_dir is not None:
        backend = CachedBackend(backend, config.cache_dir)
    return backend


def build_registry(configs: list[BackendConfig]) -> dict[str, Backend]:
    """Instantiate all configured backends, keyed by id; ids must be unique."""
    registry: dict[str, Backend] = {}
    for config in configs:
        if config.id in registry:
            raise ValueError(f"duplicate backend id {config.id!r}")
        registry[config.id] = build_backend(config)
    return registry

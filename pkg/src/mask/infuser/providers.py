"""Chat-completion providers: the HTTP client, a transcript cache, and wrappers.

The persona infuser only ever talks to a CompletionProvider, so the whole
pipeline runs identically against the real HTTP endpoint, a cached transcript,
or the deterministic mock (see mock.py).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

import requests

__all__ = [
    "ProviderError",
    "CompletionProvider",
    "HTTPChatProvider",
    "TranscriptCache",
    "CachingProvider",
    "ReplayProvider",
]

DEFAULT_MAX_RETRIES = 3
DEFAULT_TIMEOUT_S = 30.0
DEFAULT_MAX_CONCURRENCY = 8


class ProviderError(RuntimeError):
    """Transport-level completion failure (timeout, HTTP error, cache miss)."""


class CompletionProvider(ABC):
    """A text-in, text-out completion backend.

    max_retries bounds the infuser's re-prompt loop, timeout_s and
    max_concurrency govern the transport; implementations that are local
    (mock, replay) simply ignore the transport knobs.
    """

    model: str = ""
    max_retries: int = DEFAULT_MAX_RETRIES
    timeout_s: float = DEFAULT_TIMEOUT_S
    max_concurrency: int = DEFAULT_MAX_CONCURRENCY

    @abstractmethod
    def complete(self, prompt: str, *, seed: int) -> str:
        """Return the completion text for one prompt. Raises ProviderError."""


class HTTPChatProvider(CompletionProvider):
    """OpenAI-style chat-completions client over HTTP.

    The API key is read from the named environment variable at request time,
    never stored in configuration files.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "MASK_API_KEY",
        temperature: float = 0.2,
        max_retries: int = DEFAULT_MAX_RETRIES,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_concurrency: int = DEFAULT_MAX_CONCURRENCY,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.temperature = temperature
        self.max_retries = max_retries
        self.timeout_s = timeout_s
        self.max_concurrency = max_concurrency
        self._session = requests.Session()

    def complete(self, prompt: str, *, seed: int) -> str:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "seed": seed,
        }
        try:
            resp = self._session.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except requests.exceptions.Timeout as e:
            raise ProviderError(f"request timed out after {self.timeout_s}s") from e
        except requests.exceptions.RequestException as e:
            raise ProviderError(f"request failed: {e}") from e
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ProviderError(f"malformed completion response: {e}") from e


def _prompt_key(prompt: str, seed: int) -> str:
    return hashlib.sha256(f"{seed}\x00{prompt}".encode("utf-8")).hexdigest()


class TranscriptCache:
    """Append-only file of (prompt-hash, seed, reply) records.

    One JSON object per line; safe for concurrent writers within one process.
    Replaying a cached transcript makes real-provider builds reproducible
    offline.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._replies: dict[str, str] = {}
        self.model: Optional[str] = None
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                if "meta" in rec:
                    self.model = rec["meta"].get("model")
                else:
                    self._replies[rec["key"]] = rec["reply"]

    def set_model(self, model: str) -> None:
        """Record which model produced the cached replies (written once)."""
        with self._lock:
            if self.model == model:
                return
            self.model = model
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps({"meta": {"model": model}}) + "\n")

    def lookup(self, prompt: str, seed: int) -> Optional[str]:
        return self._replies.get(_prompt_key(prompt, seed))

    def record(self, prompt: str, seed: int, reply: str) -> None:
        key = _prompt_key(prompt, seed)
        with self._lock:
            if key in self._replies:
                return
            self._replies[key] = reply
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(
                    json.dumps({"key": key, "seed": seed, "reply": reply}, ensure_ascii=False)
                    + "\n"
                )

    def __len__(self) -> int:
        return len(self._replies)


class CachingProvider(CompletionProvider):
    """Serves completions from a TranscriptCache, filling misses from `inner`."""

    def __init__(self, inner: CompletionProvider, cache: TranscriptCache):
        self.inner = inner
        self.cache = cache
        self.model = inner.model
        self.max_retries = inner.max_retries
        self.timeout_s = inner.timeout_s
        self.max_concurrency = inner.max_concurrency
        cache.set_model(inner.model)

    def complete(self, prompt: str, *, seed: int) -> str:
        cached = self.cache.lookup(prompt, seed)
        if cached is not None:
            return cached
        reply = self.inner.complete(prompt, seed=seed)
        self.cache.record(prompt, seed, reply)
        return reply


class ReplayProvider(CompletionProvider):
    """Answers only from a recorded transcript; any miss is an error.

    Adopts the transcript's recorded model id so a replayed build serializes
    byte-identically to the original, without network access.
    """

    def __init__(self, cache: TranscriptCache):
        self.cache = cache
        self.model = cache.model or "replay"

    def complete(self, prompt: str, *, seed: int) -> str:
        cached = self.cache.lookup(prompt, seed)
        if cached is None:
            raise ProviderError("no cached reply for this (prompt, seed)")
        return cached

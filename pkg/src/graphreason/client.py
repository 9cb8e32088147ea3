"""Chat-completions transport with retries, bounded concurrency and replay fixtures."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import httpx

from .errors import InputError, TransportError

log = logging.getLogger(__name__)

RETRY_STATUSES = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


class TransientError(Exception):
    """Raised by a backend for failures worth retrying."""

    def __init__(self, message="transient failure", status=None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class ClientConfig:
    endpoint_url: str = "http://localhost:8000/v1/chat/completions"
    model_name: str = "deepseek-reasoner"
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.6
    max_tokens: int = 2048
    max_retries: int = 3
    timeout: float = 120.0
    max_concurrency: int = 8
    backoff_base: float = 1.0
    backoff_max: float = 30.0

    def __post_init__(self):
        if self.temperature < 0:
            raise InputError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise InputError("max_tokens must be positive")
        if self.max_retries < 0:
            raise InputError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise InputError("max_concurrency must be positive")
        if self.timeout <= 0:
            raise InputError("timeout must be positive")

    def for_summaries(self) -> "ClientConfig":
        return replace(self, temperature=0.0)


def request_body(cfg: ClientConfig, prompt: str) -> bytes:
    """Canonical JSON body; identical (cfg, prompt) give identical bytes."""
    payload = {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def request_hash(cfg: ClientConfig, prompt: str) -> str:
    return hashlib.sha256(request_body(cfg, prompt)).hexdigest()


class ChatClient:
    """Base client: retry loop and concurrency permits around ``_send``.

    Subclasses implement ``_send(body, prompt)`` and raise ``TransientError``
    for retryable failures or ``TransportError`` for fatal ones.
    """

    def __init__(self, config: Optional[ClientConfig] = None, sleep: Callable[[float], None] = time.sleep):
        self.config = config or ClientConfig()
        self._permits = threading.BoundedSemaphore(self.config.max_concurrency)
        self._sleep = sleep
        self._lock = threading.Lock()
        self.attempts = 0
        self.in_flight = 0
        self.peak_in_flight = 0

    def _send(self, body: bytes, prompt: str) -> str:
        raise NotImplementedError

    def _delay(self, attempt: int) -> float:
        return min(self.config.backoff_base * 2 ** attempt, self.config.backoff_max)

    def chat_complete(self, prompt: str) -> str:
        body = request_body(self.config, prompt)
        last: Optional[TransientError] = None
        tries = self.config.max_retries + 1
        for attempt in range(tries):
            with self._permits:
                with self._lock:
                    self.attempts += 1
                    self.in_flight += 1
                    self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
                try:
                    return self._send(body, prompt)
                except TransientError as exc:
                    last = exc
                finally:
                    with self._lock:
                        self.in_flight -= 1
            if attempt + 1 < tries:
                delay = self._delay(attempt)
                log.warning("chat request failed (%s); retry %d/%d in %.1fs",
                            last, attempt + 1, self.config.max_retries, delay)
                self._sleep(delay)
        raise TransportError(
            f"chat request failed after {tries} attempt(s): {last}",
            status=getattr(last, "status", None),
            attempts=tries,
        )


class HTTPChatClient(ChatClient):
    """POSTs to an OpenAI-style chat-completions endpoint."""

    def __init__(self, config: Optional[ClientConfig] = None, sleep=time.sleep, http: Optional[httpx.Client] = None):
        super().__init__(config, sleep)
        self._http = http or httpx.Client(timeout=self.config.timeout)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _send(self, body: bytes, prompt: str) -> str:
        try:
            resp = self._http.post(self.config.endpoint_url, content=body, headers=self._headers())
        except (httpx.TimeoutException, httpx.NetworkError, httpx.RemoteProtocolError) as exc:
            raise TransientError(type(exc).__name__) from exc
        except httpx.HTTPError as exc:
            raise TransportError(f"request error: {type(exc).__name__}") from exc
        if resp.status_code in RETRY_STATUSES:
            raise TransientError(f"HTTP {resp.status_code}", status=resp.status_code)
        if not 200 <= resp.status_code < 300:
            raise TransportError(f"HTTP {resp.status_code}", status=resp.status_code, attempts=1)
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response shape: {exc!r}", status=resp.status_code) from exc
        return content or ""

    def close(self):
        self._http.close()


class MockChatClient(ChatClient):
    """Answers from a Python callable ``responder(prompt) -> str``."""

    def __init__(self, responder, config: Optional[ClientConfig] = None, sleep=lambda s: None):
        super().__init__(config, sleep)
        self._responder = responder if callable(responder) else (lambda prompt: responder)

    def _send(self, body: bytes, prompt: str) -> str:
        return self._responder(prompt)


class ReplayChatClient(ChatClient):
    """Looks replies up by request hash in a fixture mapping."""

    def __init__(self, fixture: dict[str, str], config: Optional[ClientConfig] = None, sleep=lambda s: None):
        super().__init__(config, sleep)
        self.fixture = dict(fixture)

    @classmethod
    def from_file(cls, path, config: Optional[ClientConfig] = None) -> "ReplayChatClient":
        return cls(load_fixture(path), config)

    @classmethod
    def from_prompts(cls, replies: dict[str, str], config: Optional[ClientConfig] = None) -> "ReplayChatClient":
        config = config or ClientConfig()
        return cls({request_hash(config, p): r for p, r in replies.items()}, config)

    def _send(self, body: bytes, prompt: str) -> str:
        key = hashlib.sha256(body).hexdigest()
        try:
            return self.fixture[key]
        except KeyError:
            raise TransportError(f"no recorded reply for request {key[:12]}", attempts=1) from None


class RecordingChatClient(ChatClient):
    """Wraps another client and keeps every reply keyed by request hash."""

    def __init__(self, inner: ChatClient):
        super().__init__(replace(inner.config, max_retries=0))
        self.inner = inner
        self.recorded: dict[str, str] = {}

    def _send(self, body: bytes, prompt: str) -> str:
        reply = self.inner.chat_complete(prompt)
        with self._lock:
            self.recorded[hashlib.sha256(body).hexdigest()] = reply
        return reply

    def save(self, path) -> None:
        save_fixture(self.recorded, path)


def load_fixture(path) -> dict[str, str]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read fixture {path}: {exc}") from exc
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise InputError(f"fixture {path} must map request hashes to reply strings")
    return data


def save_fixture(fixture: dict[str, str], path) -> None:
    Path(path).write_text(json.dumps(fixture, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def chat_complete(cfg: ClientConfig, prompt: str) -> str:
    """One-shot request with a throwaway HTTP client."""
    client = HTTPChatClient(cfg)
    try:
        return client.chat_complete(prompt)
    finally:
        client.close()

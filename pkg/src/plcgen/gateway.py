"""Uniform access to text-generation backends.

Three backend kinds behind one ``Gateway`` class:

- ``remote_api``: an OpenAI-compatible chat-completions endpoint over HTTP, with
  bounded retries and exponential backoff on transient failures. The API key is
  read from an environment variable at call time; configs carry only the
  variable's *name*, so key material never lands in files.
- ``mock``: scripted responses, matched against the stage tag of the request's
  last message. Script files are ordered plain text with ``@stage`` headers.
- ``replay``: a content-addressed on-disk cache keyed by a hash of
  (messages, model, temperature, seed). Missing entries are a typed error.

Any backend can record its responses into a replay cache via
``BackendConfig.record_to``, which is how the committed test fixtures were made.

A ``Gateway`` instance holds the mock consumption state, so ordered-script
semantics require reusing one instance per run (the pipeline does).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import requests

from plcgen.prompting import ChatExchange, as_messages

BACKEND_KINDS = ("remote_api", "mock", "replay")


class GatewayError(Exception):
    """Base class for all generation failures."""


class ConfigError(GatewayError):
    """The backend configuration is unusable."""


class AuthError(GatewayError):
    """Authentication failed or no key is available; retrying cannot help."""


class NetworkExhaustedError(GatewayError):
    """All allowed attempts against the remote endpoint failed."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class ReplayMissError(GatewayError):
    """The replay cache holds no entry for this request."""

    def __init__(self, message: str, request_hash: str):
        super().__init__(message)
        self.request_hash = request_hash


class ScriptExhaustedError(GatewayError):
    """The mock script has no further response for the requested stage."""


class NoCodeFoundError(GatewayError):
    """The reply contains neither a fenced code block nor bare valid ST."""


@dataclass(frozen=True)
class GenerationRequest:
    messages: tuple[ChatExchange, ...]
    model: str
    temperature: float = 0.7
    max_tokens: int = 2048
    seed: int | None = None
    stop: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a generation request needs at least one message")
        if not (math.isfinite(self.temperature) and 0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature must be within 0..2, got {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if isinstance(self.messages, list):
            object.__setattr__(self, "messages", tuple(self.messages))

    @property
    def stage(self) -> str:
        return self.messages[-1].stage


@dataclass(frozen=True)
class GenerationResult:
    text: str
    finish_reason: str  # stop | length | error
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0
    backend_id: str = ""

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "finish_reason": self.finish_reason,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "latency_ms": self.latency_ms,
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationResult":
        return cls(
            text=data["text"],
            finish_reason=data["finish_reason"],
            prompt_tokens=data.get("prompt_tokens", 0),
            completion_tokens=data.get("completion_tokens", 0),
            latency_ms=data.get("latency_ms", 0.0),
            backend_id=data.get("backend_id", ""),
        )


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""  # name of the env var; the key itself is never stored
    timeout: float = 60.0
    max_retries: int = 2
    backoff_base: float = 0.5
    script_path: str | None = None
    cache_path: str | None = None
    record_to: str | None = None
    rate_limit_per_minute: int = 0  # 0 disables the limiter

    def validate(self, *, has_inline_script: bool = False) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ConfigError(f"unknown backend kind '{self.kind}'")
        if self.kind == "remote_api" and not (self.endpoint and self.model):
            raise ConfigError("remote_api backend needs both an endpoint and a model")
        if self.kind == "mock" and not (self.script_path or has_inline_script):
            raise ConfigError("mock backend needs a script path")
        if self.kind == "replay" and not self.cache_path:
            raise ConfigError("replay backend needs a cache path")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model": self.model,
            "api_key_env": self.api_key_env,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "backoff_base": self.backoff_base,
            "script_path": self.script_path,
            "cache_path": self.cache_path,
            "record_to": self.record_to,
            "rate_limit_per_minute": self.rate_limit_per_minute,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackendConfig":
        known = {f for f in cls.__dataclass_fields__}  # noqa: C416 - field names
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown backend config keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("backend config needs a 'kind'")
        return cls(**data)


# -- request hashing -----------------------------------------------------------------


def canonical_request(request: GenerationRequest) -> dict:
    """The hashed view of a request: content only, no timing, no budget knobs."""
    return {
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "model": request.model,
        "temperature": request.temperature,
        "seed": request.seed,
    }


def request_hash(request: GenerationRequest) -> str:
    blob = json.dumps(
        canonical_request(request), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- mock scripts --------------------------------------------------------------------


@dataclass
class ScriptEntry:
    stage: str
    text: str
    repeat: bool = False


class MockScript:
    """Ordered responses grouped by stage; a ``@repeat`` entry answers every
    subsequent request for its stage."""

    def __init__(self, entries: Sequence[ScriptEntry] = ()):
        self._queues: dict[str, deque[ScriptEntry]] = {}
        self._lock = threading.Lock()
        for entry in entries:
            self.add(entry.stage, entry.text, repeat=entry.repeat)

    def add(self, stage: str, text: str, *, repeat: bool = False) -> "MockScript":
        self._queues.setdefault(stage, deque()).append(ScriptEntry(stage, text, repeat))
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"mock script file not found: {path}")
        script = cls()
        header = re.compile(r"^@stage\s+(\S+)(\s+@repeat)?\s*$")
        stage: str | None = None
        repeat = False
        lines: list[str] = []

        def flush():
            if stage is not None:
                script.add(stage, "\n".join(lines).strip("\n"), repeat=repeat)

        for line in path.read_text(encoding="utf-8").splitlines():
            m = header.match(line)
            if m:
                flush()
                stage, repeat, lines = m.group(1), bool(m.group(2)), []
            elif stage is not None:
                lines.append(line)
            elif line.strip():
                raise ConfigError(f"text before the first @stage header in {path}")
        flush()
        return script

    def next_for(self, stage: str) -> str:
        with self._lock:
            queue = self._queues.get(stage)
            if not queue:
                raise ScriptExhaustedError(
                    f"mock script has no remaining response for stage '{stage}'"
                )
            entry = queue[0]
            if not entry.repeat:
                queue.popleft()
            return entry.text


# -- rate limiting -------------------------------------------------------------------


class SlidingWindowLimiter:
    """Allows at most `per_minute` acquisitions in any trailing 60s window."""

    def __init__(
        self,
        per_minute: int,
        clock: Callable[[], float] = time.monotonic,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.per_minute = per_minute
        self._clock = clock
        self._sleep = sleeper
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            self._sleep(max(wait, 0.0))


_limiters: dict[tuple[str, int], SlidingWindowLimiter] = {}
_limiters_lock = threading.Lock()


def _limiter_for(endpoint: str, per_minute: int) -> SlidingWindowLimiter | None:
    if per_minute <= 0:
        return None
    key = (endpoint, per_minute)
    with _limiters_lock:
        if key not in _limiters:
            _limiters[key] = SlidingWindowLimiter(per_minute)
        return _limiters[key]


# -- the gateway ---------------------------------------------------------------------

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class Gateway:
    def __init__(
        self,
        config: BackendConfig,
        *,
        script: MockScript | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        config.validate(has_inline_script=script is not None)
        self.config = config
        self._sleep = sleeper
        self._script = script
        if config.kind == "mock" and script is None:
            self._script = MockScript.from_file(config.script_path)
        self._session = requests.Session() if config.kind == "remote_api" else None

    # -- public entry point ---------------------------------------------------------

    def generate(self, request: GenerationRequest) -> GenerationResult:
        if self.config.kind == "remote_api":
            result = self._remote(request)
        elif self.config.kind == "mock":
            result = self._mock(request)
        else:
            result = self._replay(request)
        if self.config.record_to:
            self._record(request, result)
        return result

    # -- backends ---------------------------------------------------------------------

    def _mock(self, request: GenerationRequest) -> GenerationResult:
        start = time.perf_counter()
        text = self._script.next_for(request.stage)
        return GenerationResult(
            text=text,
            finish_reason="stop",
            prompt_tokens=sum(len(m.content.split()) for m in request.messages),
            completion_tokens=len(text.split()),
            latency_ms=(time.perf_counter() - start) * 1000.0,
            backend_id="mock",
        )

    def _replay(self, request: GenerationRequest) -> GenerationResult:
        digest = request_hash(request)
        path = Path(self.config.cache_path) / f"{digest}.json"
        if not path.is_file():
            raise ReplayMissError(
                f"no recorded response for stage '{request.stage}' "
                f"(model {request.model!r}, hash {digest[:12]}…); "
                f"cache dir: {self.config.cache_path}",
                request_hash=digest,
            )
        entry = json.loads(path.read_text(encoding="utf-8"))
        return GenerationResult.from_dict(entry["response"])

    def _remote(self, request: GenerationRequest) -> GenerationResult:
        config = self.config
        headers = {"Content-Type": "application/json"}
        if config.api_key_env:
            key = os.environ.get(config.api_key_env)
            if not key:
                raise AuthError(
                    f"environment variable '{config.api_key_env}' is not set; "
                    "export the API key there (it is never read from config files)"
                )
            headers["Authorization"] = f"Bearer {key}"

        payload: dict = {
            "model": request.model or config.model,
            "messages": as_messages(request.messages),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        if request.stop:
            payload["stop"] = list(request.stop)

        url = config.endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += "/chat/completions"

        limiter = _limiter_for(config.endpoint, config.rate_limit_per_minute)
        attempts_allowed = 1 + config.max_retries
        last_failure = "no attempt made"
        for attempt in range(1, attempts_allowed + 1):
            if limiter is not None:
                limiter.acquire()
            start = time.perf_counter()
            try:
                response = self._session.post(
                    url, json=payload, headers=headers, timeout=config.timeout
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_failure = f"{type(exc).__name__}: {exc}"
            else:
                if response.status_code in (401, 403):
                    raise AuthError(
                        f"authentication rejected by {url} (HTTP {response.status_code})"
                    )
                if response.status_code == 200:
                    return self._parse_completion(
                        response, latency_ms=(time.perf_counter() - start) * 1000.0
                    )
                last_failure = f"HTTP {response.status_code}"
                if response.status_code not in _RETRYABLE_STATUS:
                    raise GatewayError(
                        f"remote endpoint rejected the request: {last_failure} "
                        f"({response.text[:200]})"
                    )
            if attempt < attempts_allowed:
                self._sleep(config.backoff_base * (2 ** (attempt - 1)))
        raise NetworkExhaustedError(
            f"remote endpoint failed after {attempts_allowed} attempts "
            f"(last: {last_failure})",
            attempts=attempts_allowed,
        )

    def _parse_completion(self, response, latency_ms: float) -> GenerationResult:
        try:
            body = response.json()
            choice = body["choices"][0]
            text = choice["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed chat-completion response: {exc}") from exc
        finish = choice.get("finish_reason", "stop")
        if finish not in ("stop", "length"):
            finish = "stop"
        usage = body.get("usage", {}) or {}
        return GenerationResult(
            text=text,
            finish_reason=finish,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency_ms=latency_ms,
            backend_id=f"remote:{self.config.model}",
        )

    # -- recording --------------------------------------------------------------------

    def _record(self, request: GenerationRequest, result: GenerationResult) -> None:
        digest = request_hash(request)
        directory = Path(self.config.record_to)
        directory.mkdir(parents=True, exist_ok=True)
        entry = {"request": canonical_request(request), "response": result.to_dict()}
        tmp = directory / f".{digest}.tmp"
        tmp.write_text(
            json.dumps(entry, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        tmp.replace(directory / f"{digest}.json")


def generate(request: GenerationRequest, config: BackendConfig) -> GenerationResult:
    """One-off convenience wrapper. Mock scripts keep their place only within a
    single Gateway, so looping callers should hold their own instance."""
    return Gateway(config).generate(request)


# -- reply parsing -------------------------------------------------------------------

_FENCE_OPEN = re.compile(r"^[ \t]*```[^\n]*$", re.MULTILINE)


def extract_code_block(text: str) -> str:
    """First fenced block wins; bare text that checks clean as ST is accepted
    as a fallback; anything else is a typed failure."""
    match = _FENCE_OPEN.search(text)
    if match:
        rest = text[match.end() :]
        if rest.startswith("\n"):
            rest = rest[1:]
        close = _FENCE_OPEN.search(rest)
        # an unclosed fence still counts: models routinely drop the final fence
        return rest[: close.start()].rstrip("\n") if close else rest.rstrip("\n")
    from plcgen.st import check  # local import: keep gateway importable standalone

    if text.strip() and check(text).passed:
        return text
    raise NoCodeFoundError("the reply contains no fenced code block and is not valid ST")

"""Provider-agnostic chat-completion gateway with record/replay support.

Three transports implement ``send(request) -> str``:

* LiveTransport posts to any OpenAI-style chat-completion endpoint
  (URL and model from config, API key from an environment variable).
* ReplayTransport serves stored responses keyed by the exact normalized
  prompt text; a miss raises instead of silently going live.
* RecordingTransport wraps another transport and captures every exchange
  into a TranscriptStore.

Every ``complete`` invocation, including failures, is appended to the
gateway log before control returns to the caller.
"""

from __future__ import annotations

import csv
import hashlib
import json
import threading
import time
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Protocol

import httpx

from .errors import (
    MalformedJsonError,
    NoJsonFoundError,
    ReplayMissError,
    TransportError,
    TransportTimeoutError,
)

logger = logging.getLogger(__name__)

STEM_TAG = "stem"
JUDGMENT_TAG = "judgment"

_JSON_ONLY_REMINDER = "\n\nReturn only the JSON object, with no other text."


@dataclass(frozen=True)
class CompletionRequest:
    prompt_text: str
    temperature: float = 0.0
    max_output_tokens: int = 256
    request_tag: str = STEM_TAG

    def __post_init__(self):
        if not self.prompt_text:
            raise ValueError("prompt_text must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionResponse:
    raw_text: str
    latency_ms: int
    transport_label: str

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


@dataclass
class LogRecord:
    timestamp: str
    request_tag: str
    model: str
    prompt: str
    raw_response: str
    status: str
    latency_ms: int


LOG_HEADER = ["timestamp", "request_tag", "model", "prompt", "raw_response", "status", "latency_ms"]


def normalize_prompt(text: str) -> str:
    """Canonical prompt form for replay keys: LF endings, no trailing blanks."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    return "\n".join(line.rstrip() for line in lines)


def _prompt_key(request_tag: str, prompt: str) -> tuple[str, str]:
    digest = hashlib.sha256(normalize_prompt(prompt).encode("utf-8")).hexdigest()
    return (request_tag, digest)


class TranscriptStore:
    """Ordered (request, response) pairs; duplicate prompts are last-write-wins."""

    def __init__(self):
        self._pairs: list[tuple[str, str, str]] = []  # (tag, prompt, response)
        self._index: dict[tuple[str, str], str] = {}

    def __len__(self) -> int:
        return len(self._index)

    def add(self, request_tag: str, prompt: str, response: str) -> None:
        self._pairs.append((request_tag, prompt, response))
        self._index[_prompt_key(request_tag, prompt)] = response

    def lookup(self, request_tag: str, prompt: str) -> str | None:
        return self._index.get(_prompt_key(request_tag, prompt))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for tag, prompt, response in self._pairs:
                fh.write(json.dumps(
                    {"request_tag": tag, "prompt": prompt, "response": response},
                    ensure_ascii=False,
                ))
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "TranscriptStore":
        store = cls()
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedJsonError(f"{path}:{lineno}: {exc}") from exc
            store.add(obj["request_tag"], obj["prompt"], obj["response"])
        return store


def record_transcript(pairs: Iterable[tuple[CompletionRequest, CompletionResponse]]) -> TranscriptStore:
    store = TranscriptStore()
    for request, response in pairs:
        store.add(request.request_tag, request.prompt_text, response.raw_text)
    return store


class Transport(Protocol):
    label: str

    def send(self, request: CompletionRequest) -> str: ...


class ReplayTransport:
    """Read-only transport backed by a transcript store."""

    label = "replay"

    def __init__(self, store: TranscriptStore):
        self._store = store

    def send(self, request: CompletionRequest) -> str:
        response = self._store.lookup(request.request_tag, request.prompt_text)
        if response is None:
            raise ReplayMissError(
                f"no stored response for a {request.request_tag!r} prompt "
                f"starting {request.prompt_text[:60]!r}"
            )
        return response


def replay_transport(store: TranscriptStore) -> ReplayTransport:
    return ReplayTransport(store)


class RecordingTransport:
    """Pass-through transport that captures exchanges for later replay."""

    def __init__(self, inner: Transport, store: TranscriptStore):
        self._inner = inner
        self.store = store

    @property
    def label(self) -> str:
        return self._inner.label

    def send(self, request: CompletionRequest) -> str:
        response = self._inner.send(request)
        self.store.add(request.request_tag, request.prompt_text, response)
        return response


class LiveTransport:
    """HTTPS chat-completion transport; no provider is hardwired."""

    label = "live"

    def __init__(self, endpoint_url: str, model: str, api_key: str,
                 timeout_s: float = 60.0, client: httpx.Client | None = None):
        self.endpoint_url = endpoint_url
        self.model = model
        self._api_key = api_key
        self._timeout = timeout_s
        self._client = client

    def send(self, request: CompletionRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt_text}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        try:
            if self._client is not None:
                resp = self._client.post(self.endpoint_url, json=payload,
                                         headers=headers, timeout=self._timeout)
            else:
                resp = httpx.post(self.endpoint_url, json=payload,
                                  headers=headers, timeout=self._timeout)
        except httpx.TimeoutException as exc:
            raise TransportTimeoutError(f"completion timed out after {self._timeout}s") from exc
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"unexpected completion payload: {exc}") from exc


class CompletionLog:
    """Thread-safe in-memory log with a CSV writer."""

    def __init__(self):
        self._records: list[LogRecord] = []
        self._lock = threading.Lock()

    def append(self, record: LogRecord) -> None:
        with self._lock:
            self._records.append(record)

    def records(self) -> list[LogRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def write_csv(self, destination, include_timestamps: bool = True) -> None:
        records = self.records()
        buffer_rows = []
        for r in records:
            buffer_rows.append([
                r.timestamp if include_timestamps else "",
                r.request_tag, r.model, r.prompt, r.raw_response,
                r.status, r.latency_ms,
            ])
        if hasattr(destination, "write"):
            writer = csv.writer(destination, lineterminator="\n")
            writer.writerow(LOG_HEADER)
            writer.writerows(buffer_rows)
        else:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(LOG_HEADER)
                writer.writerows(buffer_rows)


class LlmGateway:
    """Completion front door: retries, logging, bounded in-flight requests."""

    def __init__(
        self,
        transport: Transport,
        log: CompletionLog | None = None,
        model_label: str = "",
        max_attempts: int = 3,
        backoff_base_s: float = 0.5,
        max_in_flight: int = 1,
        sleep=time.sleep,
        clock=None,
    ):
        self.transport = transport
        self.log = log if log is not None else CompletionLog()
        self.model_label = model_label
        self.max_attempts = max_attempts
        self.backoff_base_s = backoff_base_s
        self._sleep = sleep
        self._clock = clock or (lambda: datetime.now(timezone.utc).isoformat())
        self._sem = threading.BoundedSemaphore(max_in_flight)

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """Send one completion request; the exchange is logged no matter what.

        Transport errors are retried with exponential backoff up to
        max_attempts; replay misses fail immediately (they indicate a
        configuration problem, not a flaky network).
        """
        start = time.perf_counter()
        error: Exception | None = None
        raw_text: str | None = None
        with self._sem:
            for attempt in range(1, self.max_attempts + 1):
                try:
                    raw_text = self.transport.send(request)
                    error = None
                    break
                except ReplayMissError as exc:
                    error = exc
                    break
                except TransportError as exc:
                    error = exc
                    if attempt < self.max_attempts:
                        self._sleep(self.backoff_base_s * (2 ** (attempt - 1)))
        latency_ms = int((time.perf_counter() - start) * 1000)
        if self.transport.label == "replay":
            latency_ms = 0  # keep replay logs byte-stable
        self.log.append(LogRecord(
            timestamp=self._clock(),
            request_tag=request.request_tag,
            model=self.model_label,
            prompt=request.prompt_text,
            raw_response=raw_text if raw_text is not None else "",
            status="ok" if error is None else type(error).__name__,
            latency_ms=latency_ms,
        ))
        if error is not None:
            raise error
        return CompletionResponse(
            raw_text=raw_text,
            latency_ms=latency_ms,
            transport_label=self.transport.label,
        )

    def complete_json(self, request: CompletionRequest) -> tuple[Any, CompletionResponse]:
        """Complete and extract the first JSON object from the response.

        A malformed response earns one re-ask with an appended
        JSON-only instruction before giving up.
        """
        response = self.complete(request)
        try:
            value, _ = extract_json(response.raw_text)
            return value, response
        except (NoJsonFoundError, MalformedJsonError):
            logger.warning("malformed JSON for %s prompt; re-asking once", request.request_tag)
        retry = CompletionRequest(
            prompt_text=request.prompt_text + _JSON_ONLY_REMINDER,
            temperature=request.temperature,
            max_output_tokens=request.max_output_tokens,
            request_tag=request.request_tag,
        )
        response = self.complete(retry)
        value, _ = extract_json(response.raw_text)
        return value, response


def extract_json(raw_text: str) -> tuple[Any, tuple[int, int]]:
    """First well-formed JSON object in free text, plus the span consumed.

    Tolerates prose and code fences around the object. NoJsonFoundError
    when there is no ``{`` at all; MalformedJsonError when braces exist
    but nothing parses.
    """
    decoder = json.JSONDecoder()
    saw_brace = False
    for index, char in enumerate(raw_text):
        if char != "{":
            continue
        saw_brace = True
        try:
            value, end = decoder.raw_decode(raw_text[index:])
        except json.JSONDecodeError:
            continue
        return value, (index, index + end)
    if saw_brace:
        raise MalformedJsonError("brace-delimited text present but no JSON object parses")
    raise NoJsonFoundError("no JSON object in response text")

"""Completion backends: a remote chat-completion client and a scripted
provider for tests and offline demos.

Both honour the request's stop sequences on the client side: whatever the
backend returns is truncated at the first stop occurrence, so callers
never see a completion containing ``Player:`` or ``Game:``.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx

from .prompts import CompletionRequest, render_request


class ProviderError(Exception):
    pass


class RequestTimeout(ProviderError):
    pass


class AuthFailure(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


class MalformedResponse(ProviderError):
    pass


class ScriptExhausted(ProviderError):
    pass


class EmptyCompletion(Exception):
    """The backend answered, but with nothing usable."""


class ScriptMismatch(ProviderError):
    pass


class CompletionProvider(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


def enforce_stops(text: str, stops: Sequence[str]) -> str:
    """Truncate at the first occurrence of any stop sequence."""
    cut = len(text)
    for stop in stops:
        idx = text.find(stop)
        if idx != -1 and idx < cut:
            cut = idx
    return text[:cut]


@dataclass(frozen=True)
class ProviderConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-3.5-turbo-16k"
    api_key_env: str = "LLM_API_KEY"
    timeout_s: float = 60.0
    max_retries: int = 2

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderConfig":
        """Load from a JSON file with keys endpoint, model, timeout_ms,
        max_retries, api_key_env (all optional)."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        kwargs = {}
        if "endpoint" in raw:
            kwargs["endpoint_url"] = raw["endpoint"]
        if "model" in raw:
            kwargs["model_name"] = raw["model"]
        if "timeout_ms" in raw:
            kwargs["timeout_s"] = float(raw["timeout_ms"]) / 1000.0
        if "max_retries" in raw:
            kwargs["max_retries"] = int(raw["max_retries"])
        if "api_key_env" in raw:
            kwargs["api_key_env"] = raw["api_key_env"]
        return cls(**kwargs)


class ScriptedProvider:
    """Deterministic provider driven by an ordered response queue.

    Each script step is ``(matcher, response)``: the matcher is either
    None (match anything) or a substring that must occur somewhere in the
    rendered request. Every request is recorded verbatim, which is what
    the replay tests diff against.
    """

    def __init__(self, script: Sequence[tuple[str | None, str] | str] = ()):
        self._lock = threading.Lock()
        self._queue: list[tuple[str | None, str]] = []
        for step in script:
            if isinstance(step, str):
                self._queue.append((None, step))
            else:
                self._queue.append((step[0], step[1]))
        self.request_log: list[CompletionRequest] = []

    def add(self, response: str, match: str | None = None) -> "ScriptedProvider":
        with self._lock:
            self._queue.append((match, response))
        return self

    def remaining(self) -> int:
        with self._lock:
            return len(self._queue)

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            self.request_log.append(request)
            if not self._queue:
                raise ScriptExhausted("scripted provider has no responses left")
            matcher, response = self._queue[0]
            if matcher is not None and matcher not in render_request(request):
                raise ScriptMismatch(f"next scripted response expects {matcher!r} in the request")
            self._queue.pop(0)
        return enforce_stops(response, request.stop_sequences)


SCRIPT_STEP_PREFIX = "---"


def load_script(path: str | Path) -> list[tuple[str | None, str]]:
    """Parse a script file: steps are separated by lines starting with
    ``---``; an optional ``match=<substring>`` on the separator line guards
    the step. Everything until the next separator is the response text."""
    steps: list[tuple[str | None, str]] = []
    matcher: str | None = None
    body: list[str] | None = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith(SCRIPT_STEP_PREFIX):
            if body is not None:
                steps.append((matcher, "\n".join(body).strip("\n")))
            directive = line[len(SCRIPT_STEP_PREFIX):].strip()
            matcher = directive[len("match="):] if directive.startswith("match=") else None
            body = []
        elif body is not None:
            body.append(line)
    if body is not None:
        steps.append((matcher, "\n".join(body).strip("\n")))
    return steps


class HttpProvider:
    """Chat-completion HTTP client (role-tagged system/user messages).

    Sampling parameters are never sent, so the backend's defaults apply.
    Retries with exponential backoff on timeouts, rate limits, and 5xx.
    """

    def __init__(
        self,
        config: ProviderConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(
            transport=transport, timeout=httpx.Timeout(config.timeout_s)
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _payload(self, request: CompletionRequest) -> dict:
        messages = []
        if request.system_message is not None:
            messages.append({"role": "system", "content": request.system_message})
        for message in request.user_messages:
            messages.append({"role": "user", "content": message})
        payload: dict = {
            "model": self.config.model_name,
            "messages": messages,
            "max_tokens": request.max_tokens,
        }
        if request.stop_sequences:
            payload["stop"] = list(request.stop_sequences)
        return payload

    def complete(self, request: CompletionRequest) -> str:
        payload = self._payload(request)
        attempts = self.config.max_retries + 1
        delay = 0.5
        last_error: ProviderError | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(
                    self.config.endpoint_url, json=payload, headers=self._headers()
                )
            except httpx.TimeoutException as exc:
                last_error = RequestTimeout(str(exc))
            except httpx.HTTPError as exc:
                last_error = ProviderError(str(exc))
            else:
                if response.status_code in (401, 403):
                    raise AuthFailure(f"backend returned {response.status_code}")
                if response.status_code == 429:
                    last_error = RateLimited("backend returned 429")
                elif response.status_code >= 500:
                    last_error = ProviderError(f"backend returned {response.status_code}")
                else:
                    return self._extract(response, request)
            if attempt + 1 < attempts:
                self._sleep(delay)
                delay = min(delay * 2, 8.0)
        assert last_error is not None
        raise last_error

    def _extract(self, response: httpx.Response, request: CompletionRequest) -> str:
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponse(f"unexpected completion payload: {exc}") from exc
        if not isinstance(text, str):
            raise MalformedResponse("completion content is not text")
        return enforce_stops(text, request.stop_sequences)

    def close(self) -> None:
        self._client.close()

from __future__ import annotations

import json

import httpx
import pytest

from plotroom.prompts import CompletionRequest
from plotroom.providers import (
    AuthFailure,
    HttpProvider,
    MalformedResponse,
    ProviderConfig,
    ProviderError,
    RateLimited,
    RequestTimeout,
    ScriptExhausted,
    ScriptMismatch,
    ScriptedProvider,
    enforce_stops,
    load_script,
)


def request(stop=("Player:", "Game:")) -> CompletionRequest:
    return CompletionRequest("sys", ("hello",), tuple(stop), 1000)


class TestStops:
    def test_truncates_at_first_stop(self):
        assert enforce_stops("X\nPlayer: leak", ["Player:"]) == "X\n"

    def test_earliest_of_many(self):
        assert enforce_stops("a Game: b Player: c", ["Player:", "Game:"]) == "a "

    def test_no_stop_present(self):
        assert enforce_stops("clean", ["Player:"]) == "clean"


class TestScripted:
    def test_consumes_in_order_and_logs(self):
        provider = ScriptedProvider(["one", "two"])
        assert provider.complete(request()) == "one"
        assert provider.complete(request()) == "two"
        assert len(provider.request_log) == 2
        assert provider.request_log[0].user_messages == ("hello",)

    def test_stop_enforcement_applies(self):
        provider = ScriptedProvider(["X\nPlayer: leak"])
        assert provider.complete(request()) == "X\n"

    def test_exhausted(self):
        provider = ScriptedProvider([])
        with pytest.raises(ScriptExhausted):
            provider.complete(request())

    def test_matcher_guards(self):
        provider = ScriptedProvider([("hello", "ok")])
        assert provider.complete(request()) == "ok"
        provider = ScriptedProvider([("absent-string", "ok")])
        with pytest.raises(ScriptMismatch):
            provider.complete(request())

    def test_replay_determinism(self):
        reqs = [request(), request(stop=()), request()]
        outs, logs = [], []
        for _ in range(2):
            provider = ScriptedProvider(["a", "b Player: x", "c"])
            outs.append([provider.complete(r) for r in reqs])
            logs.append(list(provider.request_log))
        assert outs[0] == outs[1]
        assert logs[0] == logs[1]

    def test_script_file_parsing(self, tmp_path):
        script = tmp_path / "demo.script"
        script.write_text(
            "--- match=[Thought]\nline one\nline two\n---\nsecond response\n",
            encoding="utf-8",
        )
        steps = load_script(script)
        assert steps == [("[Thought]", "line one\nline two"), (None, "second response")]


def http_provider(handler, **config_kwargs) -> HttpProvider:
    config = ProviderConfig(endpoint_url="http://backend/v1/chat/completions", **config_kwargs)
    return HttpProvider(config, transport=httpx.MockTransport(handler), sleep=lambda _s: None)


def completion_json(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


class TestHttp:
    def test_roundtrip_payload_shape(self, monkeypatch):
        monkeypatch.setenv("LLM_API_KEY", "sekret")
        seen = {}

        def handler(req: httpx.Request) -> httpx.Response:
            seen["payload"] = json.loads(req.content)
            seen["auth"] = req.headers.get("authorization")
            return httpx.Response(200, json=completion_json("fine Player: cut"))

        provider = http_provider(handler)
        out = provider.complete(request())
        assert out == "fine "
        assert seen["auth"] == "Bearer sekret"
        payload = seen["payload"]
        assert payload["model"] == "gpt-3.5-turbo-16k"
        assert payload["messages"][0] == {"role": "system", "content": "sys"}
        assert payload["messages"][1] == {"role": "user", "content": "hello"}
        assert payload["stop"] == ["Player:", "Game:"]
        assert payload["max_tokens"] == 1000
        assert "temperature" not in payload

    def test_auth_failure_not_retried(self):
        calls = {"n": 0}

        def handler(_req):
            calls["n"] += 1
            return httpx.Response(401)

        with pytest.raises(AuthFailure):
            http_provider(handler).complete(request())
        assert calls["n"] == 1

    def test_rate_limit_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(_req):
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(429)
            return httpx.Response(200, json=completion_json("ok"))

        assert http_provider(handler, max_retries=2).complete(request()) == "ok"
        assert calls["n"] == 3

    def test_rate_limit_exhausts_retries(self):
        def handler(_req):
            return httpx.Response(429)

        with pytest.raises(RateLimited):
            http_provider(handler, max_retries=1).complete(request())

    def test_timeout_maps(self):
        def handler(_req):
            raise httpx.ConnectTimeout("slow")

        with pytest.raises(RequestTimeout):
            http_provider(handler, max_retries=0).complete(request())

    def test_server_error_retries(self):
        calls = {"n": 0}

        def handler(_req):
            calls["n"] += 1
            return httpx.Response(500)

        with pytest.raises(ProviderError):
            http_provider(handler, max_retries=2).complete(request())
        assert calls["n"] == 3

    def test_malformed_response(self):
        def handler(_req):
            return httpx.Response(200, json={"unexpected": True})

        with pytest.raises(MalformedResponse):
            http_provider(handler).complete(request())


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ProviderConfig(timeout_s=0)
        with pytest.raises(ValueError):
            ProviderConfig(max_retries=-1)

    def test_from_file(self, tmp_path):
        path = tmp_path / "provider.json"
        path.write_text(
            json.dumps(
                {"endpoint": "http://x/v1", "model": "m", "timeout_ms": 1500, "max_retries": 5}
            ),
            encoding="utf-8",
        )
        config = ProviderConfig.from_file(path)
        assert config.endpoint_url == "http://x/v1"
        assert config.model_name == "m"
        assert config.timeout_s == 1.5
        assert config.max_retries == 5

"""Gateway transports, JSON extraction, logging, and retry behavior."""

import json

import pytest

from clozegen.errors import (
    MalformedJsonError,
    NoJsonFoundError,
    ReplayMissError,
    TransportError,
    TransportTimeoutError,
)
from clozegen.llm_gateway import (
    JUDGMENT_TAG,
    STEM_TAG,
    CompletionLog,
    CompletionRequest,
    CompletionResponse,
    LlmGateway,
    RecordingTransport,
    ReplayTransport,
    TranscriptStore,
    extract_json,
    normalize_prompt,
    record_transcript,
    replay_transport,
)

from conftest import JUDGMENT_RESPONSE_CREATES, STEM_RESPONSE_CREATES


class ScriptedTransport:
    """Maps exact prompts to responses; raises scripted errors first."""

    label = "live"

    def __init__(self, responses=None, errors=None):
        self.responses = responses or {}
        self.errors = list(errors or [])
        self.calls = []

    def send(self, request):
        self.calls.append(request.prompt_text)
        if self.errors:
            raise self.errors.pop(0)
        try:
            return self.responses[request.prompt_text]
        except KeyError:
            raise TransportError(f"unscripted prompt {request.prompt_text[:40]!r}")


def no_sleep(_seconds):
    pass


def make_gateway(transport, **kw):
    kw.setdefault("sleep", no_sleep)
    return LlmGateway(transport, **kw)


class TestReplay:
    def test_replays_reference_stem_exchange_byte_identical(self):
        store = TranscriptStore()
        store.add(STEM_TAG, "stem prompt", STEM_RESPONSE_CREATES)
        gateway = make_gateway(replay_transport(store))
        response = gateway.complete(CompletionRequest("stem prompt", request_tag=STEM_TAG))
        assert response.raw_text == STEM_RESPONSE_CREATES
        assert response.transport_label == "replay"

    def test_replays_reference_judgment_exchange(self):
        store = TranscriptStore()
        store.add(JUDGMENT_TAG, "judgment prompt", JUDGMENT_RESPONSE_CREATES)
        gateway = make_gateway(ReplayTransport(store))
        response = gateway.complete(
            CompletionRequest("judgment prompt", request_tag=JUDGMENT_TAG)
        )
        assert response.raw_text == JUDGMENT_RESPONSE_CREATES

    def test_unseen_prompt_is_a_replay_miss(self):
        store = TranscriptStore()
        store.add(STEM_TAG, "known", "response")
        gateway = make_gateway(ReplayTransport(store))
        with pytest.raises(ReplayMissError):
            gateway.complete(CompletionRequest("unknown", request_tag=STEM_TAG))

    def test_empty_store_always_misses(self):
        gateway = make_gateway(ReplayTransport(TranscriptStore()))
        with pytest.raises(ReplayMissError):
            gateway.complete(CompletionRequest("anything"))

    def test_duplicate_prompt_is_last_write_wins(self):
        store = TranscriptStore()
        store.add(STEM_TAG, "p", "first")
        store.add(STEM_TAG, "p", "second")
        assert store.lookup(STEM_TAG, "p") == "second"

    def test_lookup_normalizes_line_endings_and_trailing_space(self):
        store = TranscriptStore()
        store.add(STEM_TAG, "line one  \nline two", "resp")
        assert store.lookup(STEM_TAG, "line one\r\nline two") == "resp"

    def test_same_prompt_under_other_tag_misses(self):
        store = TranscriptStore()
        store.add(STEM_TAG, "p", "resp")
        assert store.lookup(JUDGMENT_TAG, "p") is None

    def test_save_load_round_trip(self, tmp_path):
        store = TranscriptStore()
        store.add(STEM_TAG, "prompt with\nnewlines", STEM_RESPONSE_CREATES)
        store.add(JUDGMENT_TAG, "judgment", JUDGMENT_RESPONSE_CREATES)
        path = tmp_path / "t.jsonl"
        store.save(path)
        loaded = TranscriptStore.load(path)
        assert loaded.lookup(STEM_TAG, "prompt with\nnewlines") == STEM_RESPONSE_CREATES
        assert loaded.lookup(JUDGMENT_TAG, "judgment") == JUDGMENT_RESPONSE_CREATES

    def test_record_transcript_then_replay(self):
        pairs = [
            (CompletionRequest("p1", request_tag=STEM_TAG),
             CompletionResponse("r1", 0, "live")),
            (CompletionRequest("p2", request_tag=JUDGMENT_TAG),
             CompletionResponse("r2", 0, "live")),
        ]
        transport = replay_transport(record_transcript(pairs))
        assert transport.send(CompletionRequest("p1", request_tag=STEM_TAG)) == "r1"
        assert transport.send(CompletionRequest("p2", request_tag=JUDGMENT_TAG)) == "r2"


class TestRecordingTransport:
    def test_captures_exchanges(self):
        inner = ScriptedTransport({"p": "r"})
        store = TranscriptStore()
        transport = RecordingTransport(inner, store)
        assert transport.send(CompletionRequest("p")) == "r"
        assert store.lookup(STEM_TAG, "p") == "r"


class TestExtractJson:
    def test_reference_judgment_block(self):
        value, span = extract_json(JUDGMENT_RESPONSE_CREATES)
        assert len(value) == 10
        assert value["sectors"] == {"syntax": True, "semantics": False}
        assert span[0] == 0

    def test_fenced_block(self):
        value, _ = extract_json("```json\n{\"a\": true}\n```")
        assert value == {"a": True}

    def test_surrounding_prose(self):
        text = "Here is the answer:\n{\"x\": 1} hope that helps"
        value, (start, end) = extract_json(text)
        assert value == {"x": 1}
        assert text[start:end] == '{"x": 1}'

    def test_no_json_found(self):
        with pytest.raises(NoJsonFoundError):
            extract_json("no json here")

    def test_malformed_json(self):
        with pytest.raises(MalformedJsonError):
            extract_json("{\"a\": tru")

    def test_idempotent_on_reserialization(self):
        value, _ = extract_json(JUDGMENT_RESPONSE_CREATES)
        again, _ = extract_json(json.dumps(value))
        assert again == value


class TestGatewayLogging:
    def test_log_record_per_invocation_including_failures(self):
        transport = ScriptedTransport(errors=[TransportError("boom")] * 3)
        log = CompletionLog()
        gateway = make_gateway(transport, log=log, max_attempts=3)
        with pytest.raises(TransportError):
            gateway.complete(CompletionRequest("p1"))
        transport.responses["p2"] = "ok"
        gateway.complete(CompletionRequest("p2"))
        assert len(log) == 2
        records = log.records()
        assert records[0].status == "TransportError"
        assert records[0].raw_response == ""
        assert records[1].status == "ok"
        assert records[1].raw_response == "ok"

    def test_retry_succeeds_after_transient_errors(self):
        transport = ScriptedTransport({"p": "ok"}, errors=[TransportError("1"), TransportError("2")])
        gateway = make_gateway(transport, max_attempts=3)
        response = gateway.complete(CompletionRequest("p"))
        assert response.raw_text == "ok"
        assert len(transport.calls) == 3

    def test_retry_budget_exhausted(self):
        transport = ScriptedTransport(errors=[TransportTimeoutError("t")] * 3)
        gateway = make_gateway(transport, max_attempts=3)
        with pytest.raises(TransportTimeoutError):
            gateway.complete(CompletionRequest("p"))
        assert len(transport.calls) == 3

    def test_replay_miss_is_not_retried(self):
        store = TranscriptStore()
        gateway = make_gateway(ReplayTransport(store), max_attempts=3)
        with pytest.raises(ReplayMissError):
            gateway.complete(CompletionRequest("p"))
        assert len(gateway.log) == 1

    def test_log_csv_masks_timestamps_on_request(self, tmp_path):
        transport = ScriptedTransport({"p": "ok"})
        log = CompletionLog()
        gateway = make_gateway(transport, log=log, model_label="m1")
        gateway.complete(CompletionRequest("p"))
        masked = tmp_path / "masked.csv"
        log.write_csv(masked, include_timestamps=False)
        lines = masked.read_text("utf-8").splitlines()
        assert lines[0] == "timestamp,request_tag,model,prompt,raw_response,status,latency_ms"
        assert lines[1].startswith(",stem,m1,p,ok,ok,")


class TestCompleteJson:
    def test_reasks_once_on_malformed_json(self):
        prompt = "judge these"
        reminder = prompt + "\n\nReturn only the JSON object, with no other text."
        transport = ScriptedTransport({
            prompt: "sorry, here you go!",
            reminder: '{"a": true}',
        })
        log = CompletionLog()
        gateway = make_gateway(transport, log=log)
        value, _ = gateway.complete_json(CompletionRequest(prompt, request_tag=JUDGMENT_TAG))
        assert value == {"a": True}
        assert transport.calls == [prompt, reminder]
        assert len(log) == 2

    def test_fails_after_second_malformed_response(self):
        prompt = "judge these"
        reminder = prompt + "\n\nReturn only the JSON object, with no other text."
        transport = ScriptedTransport({prompt: "nope", reminder: "still nope"})
        gateway = make_gateway(transport)
        with pytest.raises(NoJsonFoundError):
            gateway.complete_json(CompletionRequest(prompt, request_tag=JUDGMENT_TAG))


class TestRequestValidation:
    def test_empty_prompt_rejected(self):
        with pytest.raises(ValueError):
            CompletionRequest("")

    def test_temperature_range(self):
        with pytest.raises(ValueError):
            CompletionRequest("p", temperature=2.5)

    def test_normalize_prompt(self):
        assert normalize_prompt("a \r\nb") == "a\nb"

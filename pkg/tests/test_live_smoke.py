"""Optional live-endpoint smoke test.

Skipped unless credentials are supplied:

    LLM_API_KEY=...            API key for the endpoint
    CLOZEGEN_LIVE_ENDPOINT=... chat-completion URL
    CLOZEGEN_LIVE_MODEL=...    model name

The offline suite stands in for everything else; this only proves the
live transport speaks to a real endpoint.
"""

import os

import pytest

from clozegen.llm_gateway import CompletionRequest, LiveTransport, LlmGateway

REQUIRED = ("LLM_API_KEY", "CLOZEGEN_LIVE_ENDPOINT", "CLOZEGEN_LIVE_MODEL")

pytestmark = pytest.mark.skipif(
    not all(os.environ.get(name) for name in REQUIRED),
    reason=f"live smoke test needs {', '.join(REQUIRED)}",
)


def test_live_completion_round_trip():
    transport = LiveTransport(
        endpoint_url=os.environ["CLOZEGEN_LIVE_ENDPOINT"],
        model=os.environ["CLOZEGEN_LIVE_MODEL"],
        api_key=os.environ["LLM_API_KEY"],
    )
    gateway = LlmGateway(transport, model_label=os.environ["CLOZEGEN_LIVE_MODEL"])
    response = gateway.complete(CompletionRequest(
        prompt_text="Reply with the single word: ready",
        max_output_tokens=8,
    ))
    assert response.raw_text.strip()
    assert len(gateway.log) == 1

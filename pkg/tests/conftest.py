"""Shared fixtures: reference transcripts and replica word-group files.

The string constants below are the reference model exchanges the offline
test suite replays. Transcript JSONL files are assembled at test time by
pairing these responses with prompts computed through the same seeded
code path the pipeline uses, so replay lookups match exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from clozegen.distractor_selector import build_judgment_prompt, draw_pool
from clozegen.llm_gateway import JUDGMENT_TAG, STEM_TAG
from clozegen.pipeline import headword_rng
from clozegen.stem_generator import (
    StemConstraints,
    blank_out,
    build_stem_prompt,
    parse_sentence,
    pick_key,
)
from clozegen.wordlist import load_word_groups

DATA_DIR = Path(__file__).parent / "data"

# Frozen run seed: drives the key pick ("creates"/VBZ for the create group)
# and every downstream draw in the worked-example reproduction.
WORKED_SEED = 0
DEPLETION_SEED = 0

STEM_RESPONSE_CREATES = (
    "National income `creates` economic growth and development in a country."
)
EXPECTED_STEM_CREATES = (
    "National income ____ economic growth and development in a country."
)

JUDGMENT_RESPONSE_CREATES = """{
  "sectors": {"syntax": true, "semantics": false},
  "varies": {"syntax": true, "semantics": true},
  "estimates": {"syntax": true, "semantics": false},
  "derives": {"syntax": true, "semantics": false},
  "processes": {"syntax": true, "semantics": false},
  "functions": {"syntax": true, "semantics": false},
  "legislates": {"syntax": true, "semantics": false},
  "requires": {"syntax": true, "semantics": false},
  "indicates": {"syntax": true, "semantics": true},
  "assumes": {"syntax": true, "semantics": true}
}"""

GOOD_SEVEN = [
    "sectors", "estimates", "derives", "processes",
    "functions", "legislates", "requires",
]

STEM_RESPONSE_AVAILABLE = (
    "The `available` resources for research on this topic are limited "
    "and need to be expanded."
)

JUDGMENT_RESPONSE_AVAILABLE = """{
  "evident": {"syntax": true, "semantics": true},
  "individual": {"syntax": true, "semantics": true},
  "economy": {"syntax": true, "semantics": true},
  "similar": {"syntax": true, "semantics": true},
  "legal": {"syntax": true, "semantics": true},
  "significant": {"syntax": true, "semantics": true},
  "major": {"syntax": true, "semantics": true},
  "specific": {"syntax": true, "semantics": true},
  "formula": {"syntax": true, "semantics": false},
  "period": {"syntax": true, "semantics": true}
}"""


@pytest.fixture
def worked_groups_path() -> Path:
    return DATA_DIR / "groups_worked_example.csv"


@pytest.fixture
def depletion_groups_path() -> Path:
    return DATA_DIR / "groups_depletion.csv"


def build_transcripts(groups_path: Path, seed: int, stem_response: str,
                      judgment_response: str, destination: Path,
                      constraints: StemConstraints | None = None) -> None:
    """Write a replay transcript JSONL for the first group in a file.

    Prompts are derived with the same per-headword random stream the
    pipeline forks, so the replay transport resolves them exactly; the
    responses are the frozen reference texts.
    """
    groups = load_word_groups(groups_path)
    constraints = constraints or StemConstraints()
    rng = headword_rng(seed, 0)
    key = pick_key(groups[0], rng)
    stem_prompt = build_stem_prompt(key, constraints)
    stem = blank_out(parse_sentence(stem_response), key)
    pool = draw_pool(key, groups, size=10, rng=rng, already_tried=set())
    judgment_prompt = build_judgment_prompt(stem, pool)
    with open(destination, "w", encoding="utf-8") as fh:
        for tag, prompt, response in [
            (STEM_TAG, stem_prompt, stem_response),
            (JUDGMENT_TAG, judgment_prompt, judgment_response),
        ]:
            fh.write(json.dumps(
                {"request_tag": tag, "prompt": prompt, "response": response},
                ensure_ascii=False,
            ))
            fh.write("\n")


@pytest.fixture
def worked_transcripts(tmp_path, worked_groups_path) -> Path:
    path = tmp_path / "transcripts_worked.jsonl"
    build_transcripts(worked_groups_path, WORKED_SEED,
                      STEM_RESPONSE_CREATES, JUDGMENT_RESPONSE_CREATES, path)
    return path


@pytest.fixture
def depletion_transcripts(tmp_path, depletion_groups_path) -> Path:
    path = tmp_path / "transcripts_depletion.jsonl"
    build_transcripts(depletion_groups_path, DEPLETION_SEED,
                      STEM_RESPONSE_AVAILABLE, JUDGMENT_RESPONSE_AVAILABLE, path)
    return path

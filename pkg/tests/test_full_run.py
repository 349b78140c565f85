"""Whole-sublist replay run reproducing the reference output shape:
60 question items with 178 distractors, the two missing slots coming
from the depleted adjective pool of one item."""

import csv
import json
from importlib import resources

import pytest

from clozegen.distractor_selector import build_judgment_prompt, draw_pool
from clozegen.llm_gateway import JUDGMENT_TAG, STEM_TAG
from clozegen.morphology import PosTag
from clozegen.pipeline import NA_SLOT, RunConfig, headword_rng, run_pipeline
from clozegen.stem_generator import blank_out, build_stem_prompt, parse_sentence, pick_key
from clozegen.wordlist import build_group_set, parse_headword_list, write_word_groups

SEED = 2024


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("full-run")
    raw = resources.files("clozegen.data").joinpath("awl_sublist1.csv").read_bytes()
    groups = build_group_set(parse_headword_list(raw), source_label="awl-sublist-1")
    groups_path = tmp_path / "groups.csv"
    write_word_groups(groups, groups_path)

    # Synthesize one stem + one judgment exchange per headword with the
    # exact prompts the seeded pipeline will issue. Every judgment marks
    # all candidates good except the "available" item, whose depleted
    # adjective pool yields a single good distractor.
    transcripts = tmp_path / "transcripts.jsonl"
    with open(transcripts, "w", encoding="utf-8") as fh:
        for index, group in enumerate(groups):
            rng = headword_rng(SEED, index)
            key = pick_key(group, rng)
            stem_raw = f"The annual report mentions `{key.surface}` across several chapters."
            fh.write(json.dumps({
                "request_tag": STEM_TAG,
                "prompt": build_stem_prompt(key),
                "response": stem_raw,
            }) + "\n")
            stem = blank_out(parse_sentence(stem_raw), key)
            pool = draw_pool(key, groups, size=10, rng=rng)
            if group.headword == "available":
                verdicts = {
                    c.surface: {"syntax": True, "semantics": c.surface != pool.candidates[0].surface}
                    for c in pool.candidates
                }
            else:
                verdicts = {c.surface: {"syntax": True, "semantics": False} for c in pool.candidates}
            fh.write(json.dumps({
                "request_tag": JUDGMENT_TAG,
                "prompt": build_judgment_prompt(stem, pool),
                "response": json.dumps(verdicts, indent=2),
            }) + "\n")

    config = RunConfig(
        wordlist_path=str(groups_path),
        output_path=str(tmp_path / "out.csv"),
        log_path=str(tmp_path / "log.csv"),
        item_threshold=60,
        seed=SEED,
        transport="replay",
        transcripts_path=str(transcripts),
        include_timestamps=False,
    )
    summary = run_pipeline(config)
    with open(config.output_path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return summary, rows


def test_sixty_items_one_per_headword(full_run):
    summary, rows = full_run
    assert summary.items_written == 60
    assert len(rows) == 60
    assert len({row["headword"] for row in rows}) == 60
    assert [int(row["item_id"]) for row in rows] == list(range(1, 61))


def test_one_hundred_seventy_eight_distractors(full_run):
    summary, rows = full_run
    slots = [
        row[column]
        for row in rows
        for column in ("distractor_1", "distractor_2", "distractor_3")
    ]
    real = [s for s in slots if s != NA_SLOT]
    assert len(real) == 178
    assert summary.shortfalls == 2
    depleted = [row for row in rows if NA_SLOT in row.values()]
    assert len(depleted) == 1
    assert depleted[0]["headword"] == "available"


def test_log_covers_every_exchange(full_run):
    summary, rows = full_run
    assert summary.llm_calls == 120  # one stem + one judgment per headword


def test_every_stem_validated(full_run):
    _, rows = full_run
    for row in rows:
        assert row["stem"].count("____") == 1
        assert not row["stem"].startswith("____")
        assert len(row["stem"].split()) <= 20

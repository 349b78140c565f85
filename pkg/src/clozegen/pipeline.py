"""End-to-end generation run: word groups in, output CSV + log CSV out.

Each headword gets its own random stream forked from the run seed by
group index, so results are identical whether headwords are processed
sequentially or in parallel. Under the replay transport a fixed seed
makes whole runs byte-reproducible.
"""

from __future__ import annotations

import csv
import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .distractor_selector import (
    BLANK_MODE,
    DEFAULT_MAX_ROUNDS,
    DEFAULT_POOL_SIZE,
    DistractorSet,
    select_distractors,
)
from .errors import ConfigError, GenerationExhaustedError
from .llm_gateway import (
    STEM_TAG,
    CompletionLog,
    CompletionRequest,
    LiveTransport,
    LlmGateway,
    RecordingTransport,
    ReplayTransport,
    TranscriptStore,
)
from .morphology import TaggedKey
from .stem_generator import (
    POS_CHECK_TAG,
    QuestionStem,
    StemConstraints,
    ViolationCode,
    blank_out,
    build_pos_check_prompt,
    build_stem_prompt,
    check_response,
    parse_pos_check,
    pick_key,
)
from .wordlist import WordGroupSet, load_word_groups

logger = logging.getLogger(__name__)

OUTPUT_HEADER = [
    "item_id", "headword", "sublist", "key", "key_pos",
    "stem", "distractor_1", "distractor_2", "distractor_3",
]
NA_SLOT = "N/A"

DEFAULT_API_KEY_ENV = "LLM_API_KEY"


@dataclass(frozen=True)
class QuestionItem:
    item_id: int
    stem: QuestionStem
    key: TaggedKey
    distractors: tuple[TaggedKey | None, TaggedKey | None, TaggedKey | None]
    sublist_id: int
    attempts_used: int

    @property
    def shortfall(self) -> int:
        return sum(1 for d in self.distractors if d is None)


@dataclass(frozen=True)
class RunConfig:
    wordlist_path: str
    output_path: str
    log_path: str
    item_threshold: int = 60
    seed: int = 0
    stem_constraints: StemConstraints = field(default_factory=StemConstraints)
    pool_size: int = DEFAULT_POOL_SIZE
    max_rounds: int = DEFAULT_MAX_ROUNDS
    stem_attempts: int = 3
    transport: str = "replay"  # "live" | "replay"
    transcripts_path: str | None = None
    record_path: str | None = None
    endpoint_url: str = ""
    model: str = ""
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: float = 0.0
    max_output_tokens: int = 256
    parallelism: int = 1
    include_timestamps: bool = True
    judgment_mode: str = BLANK_MODE
    llm_pos_check: bool = False


@dataclass
class RunSummary:
    items_written: int
    llm_calls: int
    duration_s: float
    shortfalls: int
    exhausted_headwords: list[str]
    output_path: str
    log_path: str

    @property
    def partial(self) -> bool:
        return self.shortfalls > 0 or bool(self.exhausted_headwords)

    def to_dict(self) -> dict:
        return {
            "items_written": self.items_written,
            "llm_calls": self.llm_calls,
            "duration_s": round(self.duration_s, 3),
            "shortfalls": self.shortfalls,
            "exhausted_headwords": self.exhausted_headwords,
            "output_path": self.output_path,
            "log_path": self.log_path,
            "partial": self.partial,
        }


def _validate_config(config: RunConfig, groups: WordGroupSet) -> None:
    if config.item_threshold < 1:
        raise ConfigError("item threshold must be a positive integer")
    if config.item_threshold > len(groups):
        raise ConfigError(
            f"threshold {config.item_threshold} exceeds the {len(groups)} available word groups "
            "(one item per headword)"
        )
    if config.parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    if config.transport not in ("live", "replay"):
        raise ConfigError(f"unknown transport {config.transport!r}")
    if config.transport == "replay" and not config.transcripts_path:
        raise ConfigError("replay transport requires a transcript file")


def build_gateway(config: RunConfig, log: CompletionLog | None = None) -> LlmGateway:
    if config.transport == "replay":
        store = TranscriptStore.load(config.transcripts_path)
        transport = ReplayTransport(store)
        model_label = config.model or "replay"
    else:
        api_key = os.environ.get(config.api_key_env, "")
        if not api_key:
            raise ConfigError(f"live transport needs an API key in ${config.api_key_env}")
        if not config.endpoint_url or not config.model:
            raise ConfigError("live transport needs endpoint_url and model")
        transport = LiveTransport(config.endpoint_url, config.model, api_key)
        model_label = config.model
    if config.record_path:
        transport = RecordingTransport(transport, TranscriptStore())
    return LlmGateway(
        transport=transport,
        log=log,
        model_label=model_label,
        max_in_flight=max(config.parallelism, 1),
    )


def headword_rng(seed: int, group_index: int) -> random.Random:
    """Independent, platform-stable random stream for one headword."""
    return random.Random(f"{seed}:{group_index}")


def generate_item(
    group,
    group_index: int,
    groups: WordGroupSet,
    gateway: LlmGateway,
    config: RunConfig,
) -> QuestionItem:
    """Stem attempts then distractor rounds for one headword.

    Raises GenerationExhaustedError when every stem attempt fails
    validation; the caller decides whether the run continues.
    """
    rng = headword_rng(config.seed, group_index)
    key = pick_key(group, rng)
    prompt = build_stem_prompt(key, config.stem_constraints)
    stem = None
    attempts = 0
    for attempt in range(1, config.stem_attempts + 1):
        attempts = attempt
        response = gateway.complete(CompletionRequest(
            prompt_text=prompt,
            temperature=config.temperature,
            max_output_tokens=config.max_output_tokens,
            request_tag=STEM_TAG,
        ))
        report, sentence = check_response(
            response.raw_text.strip(), key, config.stem_constraints, group
        )
        if report.passed and config.llm_pos_check:
            check = gateway.complete(CompletionRequest(
                prompt_text=build_pos_check_prompt(key, sentence),
                temperature=config.temperature,
                max_output_tokens=64,
                request_tag=POS_CHECK_TAG,
            ))
            if not parse_pos_check(check.raw_text):
                report.add(ViolationCode.POS_MISMATCH,
                           f"model judged {key.surface!r} not to retain {key.tag.value}")
        if report.passed:
            stem = blank_out(sentence, key)
            break
        logger.info(
            "stem attempt %d/%d for %r rejected: %s",
            attempt, config.stem_attempts, group.headword,
            ", ".join(v.code.value for v in report.violations),
        )
    if stem is None:
        raise GenerationExhaustedError(group.headword, attempts)

    distractor_set = select_distractors(
        stem, key, groups, gateway, rng,
        max_rounds=config.max_rounds, pool_size=config.pool_size,
        judgment_mode=config.judgment_mode,
    )
    slots = list(distractor_set.distractors) + [None] * distractor_set.shortfall
    return QuestionItem(
        item_id=0,  # assigned once the run's item order is final
        stem=stem,
        key=key,
        distractors=tuple(slots),
        sublist_id=group.sublist_id,
        attempts_used=attempts,
    )


def run_pipeline(config: RunConfig) -> RunSummary:
    """Generate items until the threshold is met, then write both CSVs."""
    started = time.perf_counter()
    groups = load_word_groups(config.wordlist_path)
    _validate_config(config, groups)
    log = CompletionLog()
    gateway = build_gateway(config, log)

    results: dict[int, QuestionItem] = {}
    exhausted: list[str] = []
    next_index = 0
    indexed = list(enumerate(groups))

    def attempt(index: int):
        return index, generate_item(indexed[index][1], index, groups, gateway, config)

    with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
        in_flight = []
        while True:
            while (
                len(results) + len(in_flight) < config.item_threshold
                and next_index < len(indexed)
            ):
                in_flight.append(executor.submit(attempt, next_index))
                next_index += 1
            if not in_flight:
                break
            future = in_flight.pop(0)
            try:
                index, item = future.result()
                results[index] = item
            except GenerationExhaustedError as exc:
                logger.warning("skipping headword %r: %s", exc.headword, exc)
                exhausted.append(exc.headword)

    items = []
    for item_id, index in enumerate(sorted(results), start=1):
        items.append(replace(results[index], item_id=item_id))

    write_output_csv(items, config.output_path)
    write_log_csv(log, config.log_path, include_timestamps=config.include_timestamps)
    if config.record_path and isinstance(gateway.transport, RecordingTransport):
        gateway.transport.store.save(config.record_path)

    return RunSummary(
        items_written=len(items),
        llm_calls=len(log),
        duration_s=time.perf_counter() - started,
        shortfalls=sum(item.shortfall for item in items),
        exhausted_headwords=exhausted,
        output_path=str(config.output_path),
        log_path=str(config.log_path),
    )


def write_output_csv(items: list[QuestionItem], destination) -> None:
    """Question items in item_id order; missing distractor slots are N/A."""
    rows = []
    for item in items:
        slots = [d.surface if d is not None else NA_SLOT for d in item.distractors]
        rows.append([
            item.item_id,
            item.key.headword,
            item.sublist_id,
            item.key.surface,
            item.key.tag.value,
            item.stem.text_with_blank,
            *slots,
        ])
    if hasattr(destination, "write"):
        writer = csv.writer(destination, lineterminator="\n")
        writer.writerow(OUTPUT_HEADER)
        writer.writerows(rows)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(OUTPUT_HEADER)
            writer.writerows(rows)


def write_log_csv(log: CompletionLog, destination, include_timestamps: bool = True) -> None:
    log.write_csv(destination, include_timestamps=include_timestamps)


def read_output_csv(source) -> list[dict]:
    """Rows of an output CSV as dicts (used by the review service)."""
    text = Path(source).read_text("utf-8") if not hasattr(source, "read") else source.read()
    import io as _io

    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != OUTPUT_HEADER:
        raise ValueError(f"bad output header {header!r}")
    rows = []
    for row in reader:
        if not row:
            continue
        rows.append(dict(zip(OUTPUT_HEADER, row)))
    return rows

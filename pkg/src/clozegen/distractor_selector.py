"""Candidate pools, batched syntax/semantics judgments, distractor choice.

A good distractor is one the judge marks syntactically valid but
semantically wrong in the blank. Candidates accumulate across rounds
until three good ones exist or the same-POS pool is depleted; depletion
yields a partial set with an explicit shortfall, never an exception.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .errors import MalformedJsonError, MissingVerdictError, NonBooleanFieldError
from .llm_gateway import JUDGMENT_TAG, CompletionRequest, LlmGateway, extract_json
from .morphology import TaggedKey
from .stem_generator import QuestionStem, _load_template
from .wordlist import WordGroupSet

logger = logging.getLogger(__name__)

JUDGMENT_PROMPT_TEMPLATE = _load_template("judgment_prompt.txt")
FULL_SENTENCE_PROMPT_TEMPLATE = _load_template("judgment_full_prompt.txt")

TARGET_DISTRACTORS = 3
DEFAULT_POOL_SIZE = 10
DEFAULT_MAX_ROUNDS = 6

BLANK_MODE = "blank"
FULL_SENTENCE_MODE = "full-sentences"


@dataclass(frozen=True)
class CandidatePool:
    key: TaggedKey
    candidates: tuple[TaggedKey, ...]
    exhausted: bool

    def __post_init__(self):
        lemmas = [c.headword for c in self.candidates]
        if len(set(lemmas)) != len(lemmas):
            raise ValueError("pool candidates must be lemma-distinct")
        for candidate in self.candidates:
            if candidate.tag != self.key.tag:
                raise ValueError(
                    f"candidate {candidate.surface!r} tag {candidate.tag.value} "
                    f"differs from key tag {self.key.tag.value}"
                )
            if candidate.headword == self.key.headword:
                raise ValueError(f"candidate {candidate.surface!r} shares the key's lemma")


@dataclass(frozen=True)
class JudgmentVerdict:
    word: str
    syntax_ok: bool
    semantics_ok: bool


@dataclass(frozen=True)
class DistractorSet:
    distractors: tuple[TaggedKey, ...]
    shortfall: int
    rounds_used: int

    def __post_init__(self):
        if len(self.distractors) + self.shortfall != TARGET_DISTRACTORS:
            raise ValueError("distractors + shortfall must equal 3")


def draw_pool(
    key: TaggedKey,
    groups: WordGroupSet,
    size: int = DEFAULT_POOL_SIZE,
    rng: random.Random | None = None,
    already_tried: frozenset[TaggedKey] | set[TaggedKey] = frozenset(),
) -> CandidatePool:
    """Sample same-POS candidates from the other word groups.

    Tried candidates and their lemmas are excluded, at most one form per
    lemma is drawn, and when fewer than ``size`` fresh lemmas remain the
    pool returns them all and is marked exhausted. An empty pool is a
    valid, exhausted pool.
    """
    rng = rng or random.Random()
    tried_surfaces = {c.surface.lower() for c in already_tried}
    tried_lemmas = {c.headword for c in already_tried} | {key.headword}
    population: list[TaggedKey] = []
    for group in groups:
        if group.headword in tried_lemmas:
            continue
        for form in group.forms_for(key.tag):
            if form.lower() in tried_surfaces or form.lower() == key.surface.lower():
                continue
            population.append(TaggedKey(surface=form, tag=key.tag, headword=group.headword))
    rng.shuffle(population)
    picked: list[TaggedKey] = []
    seen_lemmas: set[str] = set()
    for candidate in population:
        if len(picked) == size:
            break
        if candidate.headword in seen_lemmas:
            continue
        seen_lemmas.add(candidate.headword)
        picked.append(candidate)
    return CandidatePool(key=key, candidates=tuple(picked), exhausted=len(picked) < size)


def build_judgment_prompt(stem: QuestionStem, pool: CandidatePool) -> str:
    """Instantiate the batched judgment prompt for one candidate pool."""
    if not pool.candidates:
        raise ValueError("cannot build a judgment prompt for an empty pool")
    words = ", ".join(c.surface for c in pool.candidates)
    return (
        JUDGMENT_PROMPT_TEMPLATE
        .replace("{words}", words)
        .replace("{stem}", stem.text_with_blank)
    )


def build_full_sentence_judgment_prompt(stem: QuestionStem, pool: CandidatePool) -> str:
    """Alternative judgment prompt showing each candidate inserted.

    Judging complete sentences instead of isolated words surfaces problems
    like verb transitivity; shares the verdict schema with the default
    prompt, so parsing is identical.
    """
    if not pool.candidates:
        raise ValueError("cannot build a judgment prompt for an empty pool")
    sentences = "\n".join(
        f"{c.surface}: ```{stem.text_with_blank.replace('____', c.surface, 1)}```"
        for c in pool.candidates
    )
    return FULL_SENTENCE_PROMPT_TEMPLATE.replace("{sentences}", sentences)


def parse_verdicts(raw: str, pool: CandidatePool) -> list[JudgmentVerdict]:
    """One verdict per pool candidate, in pool order.

    Extra keys in the response are ignored with a warning; a missing
    candidate or a non-boolean field is an error. A case-only mismatch
    between response key and candidate is tolerated (judges re-case).
    """
    value, _ = extract_json(raw)
    if not isinstance(value, dict):
        raise MalformedJsonError("judgment response is not a JSON object")
    by_lower = {}
    for response_word in value:
        by_lower.setdefault(str(response_word).lower(), response_word)
    verdicts: list[JudgmentVerdict] = []
    matched_keys = set()
    for candidate in pool.candidates:
        response_word = candidate.surface if candidate.surface in value else by_lower.get(candidate.surface.lower())
        if response_word is None:
            raise MissingVerdictError(candidate.surface)
        if response_word != candidate.surface:
            logger.warning("verdict key %r matched candidate %r case-insensitively",
                           response_word, candidate.surface)
        matched_keys.add(response_word)
        entry = value[response_word]
        if not isinstance(entry, dict):
            raise NonBooleanFieldError(f"verdict for {candidate.surface!r} is not an object")
        verdict_fields = {}
        for name in ("syntax", "semantics"):
            if name not in entry:
                raise MissingVerdictError(candidate.surface)
            if not isinstance(entry[name], bool):
                raise NonBooleanFieldError(
                    f"{name} for {candidate.surface!r} is {entry[name]!r}, expected a boolean"
                )
            verdict_fields[name] = entry[name]
        verdicts.append(JudgmentVerdict(
            word=candidate.surface,
            syntax_ok=verdict_fields["syntax"],
            semantics_ok=verdict_fields["semantics"],
        ))
    extras = set(value) - matched_keys
    if extras:
        logger.warning("judgment response contains %d unknown word(s): %s",
                       len(extras), sorted(extras))
    return verdicts


def filter_good(verdicts: list[JudgmentVerdict]) -> list[str]:
    """Keep exactly the syntax-true, semantics-false words, in input order."""
    return [v.word for v in verdicts if v.syntax_ok and not v.semantics_ok]


def select_distractors(
    stem: QuestionStem,
    key: TaggedKey,
    groups: WordGroupSet,
    gateway: LlmGateway,
    rng: random.Random,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    pool_size: int = DEFAULT_POOL_SIZE,
    judgment_mode: str = BLANK_MODE,
) -> DistractorSet:
    """Round-based selection until three good distractors or depletion.

    Good candidates accumulate across rounds; no candidate is judged twice
    for the same item. On depletion with fewer than three the partial set
    is returned with the shortfall recorded.
    """
    if judgment_mode not in (BLANK_MODE, FULL_SENTENCE_MODE):
        raise ValueError(f"unknown judgment mode {judgment_mode!r}")
    build_prompt = (
        build_judgment_prompt if judgment_mode == BLANK_MODE
        else build_full_sentence_judgment_prompt
    )
    good: list[TaggedKey] = []
    tried: set[TaggedKey] = set()
    rounds_used = 0
    while len(good) < TARGET_DISTRACTORS and rounds_used < max_rounds:
        pool = draw_pool(key, groups, size=pool_size, rng=rng, already_tried=tried)
        if not pool.candidates:
            break
        rounds_used += 1
        prompt = build_prompt(stem, pool)
        response = gateway.complete(CompletionRequest(
            prompt_text=prompt,
            request_tag=JUDGMENT_TAG,
        ))
        verdicts = parse_verdicts(response.raw_text, pool)
        good_words = set(filter_good(verdicts))
        good.extend(c for c in pool.candidates if c.surface in good_words)
        tried.update(pool.candidates)
        if pool.exhausted:
            break
    if len(good) >= TARGET_DISTRACTORS:
        selected = tuple(rng.sample(good, TARGET_DISTRACTORS))
        return DistractorSet(distractors=selected, shortfall=0, rounds_used=rounds_used)
    return DistractorSet(
        distractors=tuple(good),
        shortfall=TARGET_DISTRACTORS - len(good),
        rounds_used=rounds_used,
    )

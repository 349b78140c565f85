"""Stem prompt construction, response parsing, validation, and blanking.

The prompt template lives in a versioned resource file so tests can pin it
byte-for-byte. A model response is accepted only when the backtick-marked
key survives every item-writing rule; failures are reported with violation
codes and the stem is regenerated rather than repaired.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import MultipleKeysError, NoBackticksError
from .morphology import PosTag, TaggedKey, WordGroup

BLANK = "____"

_KEY_SEGMENT_RE = re.compile(r"`([^`]+)`")


def _load_template(name: str) -> str:
    return resources.files("clozegen.resources").joinpath(name).read_text("utf-8")


STEM_PROMPT_TEMPLATE = _load_template("stem_prompt.txt")
POS_CHECK_PROMPT_TEMPLATE = _load_template("pos_check_prompt.txt")

POS_CHECK_TAG = "pos_check"


@dataclass(frozen=True)
class StemConstraints:
    """Item-writing rules applied to generated sentences."""

    max_words: int = 20
    domain_label: str = "Academic English"
    forbid_initial_position: bool = True
    max_key_occurrences: int = 1

    def __post_init__(self):
        if self.max_words < 5:
            raise ValueError("max_words must be >= 5")


@dataclass(frozen=True)
class GeneratedSentence:
    """A parsed model sentence; full_text has the backticks stripped."""

    full_text: str
    key_surface: str
    key_char_span: tuple[int, int]


@dataclass(frozen=True)
class QuestionStem:
    text_with_blank: str
    key: TaggedKey
    word_count: int

    def __post_init__(self):
        if self.text_with_blank.count(BLANK) != 1:
            raise ValueError("stem must contain exactly one blank")


class ViolationCode(str, Enum):
    KEY_MISSING = "KEY_MISSING"
    KEY_AT_START = "KEY_AT_START"
    KEY_ALTERED = "KEY_ALTERED"
    KEY_DUPLICATED = "KEY_DUPLICATED"
    TOO_LONG = "TOO_LONG"
    POS_MISMATCH = "POS_MISMATCH"
    NO_BACKTICKS = "NO_BACKTICKS"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    message: str


@dataclass
class StemValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def codes(self) -> set[ViolationCode]:
        return {v.code for v in self.violations}

    def add(self, code: ViolationCode, message: str) -> None:
        self.violations.append(Violation(code, message))


def pick_key(group: WordGroup, rng: random.Random) -> TaggedKey:
    """Draw one (form, tag) pair from a group, driven solely by rng.

    A tag is drawn first, then a form within it, both over sorted
    orderings, so a fixed seed reproduces the same key on every platform.
    """
    tags = group.tags()
    tag = rng.choice(tags)
    surface = rng.choice(group.forms_for(tag))
    return TaggedKey(surface=surface, tag=tag, headword=group.headword)


def build_stem_prompt(key: TaggedKey, constraints: StemConstraints | None = None) -> str:
    constraints = constraints or StemConstraints()
    return (
        STEM_PROMPT_TEMPLATE
        .replace("{word}", key.surface)
        .replace("{max_words}", str(constraints.max_words))
        .replace("{domain}", constraints.domain_label)
        .replace("{tag}", key.tag.value)
    )


def parse_sentence(raw: str) -> GeneratedSentence:
    """Extract the single backtick-delimited key from a model response."""
    matches = list(_KEY_SEGMENT_RE.finditer(raw))
    if not matches:
        raise NoBackticksError("response contains no backtick-delimited key")
    if len(matches) > 1:
        raise MultipleKeysError(f"response marks {len(matches)} segments, expected 1")
    match = matches[0]
    key_surface = match.group(1)
    full_text = raw[: match.start()] + key_surface + raw[match.end():]
    span = (match.start(), match.start() + len(key_surface))
    return GeneratedSentence(full_text=full_text, key_surface=key_surface, key_char_span=span)


def _word_boundary_matches(text: str, word: str):
    return list(re.finditer(rf"\b{re.escape(word)}\b", text, re.IGNORECASE))


def _token_index_at(text: str, char_index: int) -> int:
    return len(text[:char_index].split())


def validate_stem(
    sentence: GeneratedSentence,
    requested: TaggedKey,
    constraints: StemConstraints | None = None,
    group: WordGroup | None = None,
) -> StemValidationReport:
    """Check a parsed sentence against the item-writing rules.

    All key comparisons are case-insensitive, which is what catches the
    capitalized sentence-initial keys that slip through exact matching.
    The POS check needs the word group's form sets and is skipped when no
    group is supplied.
    """
    constraints = constraints or StemConstraints()
    report = StemValidationReport()
    text = sentence.full_text
    start, end = sentence.key_char_span
    found = sentence.key_surface

    if found.lower() != requested.surface.lower():
        report.add(
            ViolationCode.KEY_ALTERED,
            f"model returned {found!r} for requested key {requested.surface!r}",
        )

    if group is not None:
        same_tag_forms = {f.lower() for f in group.inflections.get(requested.tag, frozenset())}
        if found.lower() not in same_tag_forms:
            other_tags = sorted(
                tag.value
                for tag, forms in group.inflections.items()
                if tag != requested.tag and found.lower() in {f.lower() for f in forms}
            )
            if other_tags:
                report.add(
                    ViolationCode.POS_MISMATCH,
                    f"{found!r} belongs to {'/'.join(other_tags)}, not {requested.tag.value}",
                )

    if constraints.forbid_initial_position and _token_index_at(text, start) == 0:
        report.add(ViolationCode.KEY_AT_START, f"key {found!r} begins the sentence")

    other_occurrences = [
        m for m in _word_boundary_matches(text, requested.surface)
        if not (start <= m.start() < end)
    ]
    if len(other_occurrences) + 1 > constraints.max_key_occurrences:
        report.add(
            ViolationCode.KEY_DUPLICATED,
            f"key {requested.surface!r} appears {len(other_occurrences)} more time(s)",
        )

    word_count = len(text.split())
    if word_count > constraints.max_words:
        report.add(
            ViolationCode.TOO_LONG,
            f"{word_count} words exceeds the {constraints.max_words}-word limit",
        )
    return report


def check_response(
    raw: str,
    requested: TaggedKey,
    constraints: StemConstraints | None = None,
    group: WordGroup | None = None,
) -> tuple[StemValidationReport, GeneratedSentence | None]:
    """Total validation entry point for raw model responses.

    Responses without backtick markers are still examined: if the key can
    be located case-insensitively its position decides the violation
    (KEY_AT_START at the front, otherwise KEY_MISSING because no blank can
    be created), and an entirely absent key is NO_BACKTICKS.
    """
    constraints = constraints or StemConstraints()
    report = StemValidationReport()
    try:
        sentence = parse_sentence(raw)
    except NoBackticksError:
        matches = _word_boundary_matches(raw, requested.surface)
        if not matches:
            report.add(ViolationCode.NO_BACKTICKS, "no marked key and the requested key is absent")
        elif constraints.forbid_initial_position and _token_index_at(raw, matches[0].start()) == 0:
            report.add(ViolationCode.KEY_AT_START, f"key {requested.surface!r} begins the sentence")
            if len(matches) > constraints.max_key_occurrences:
                report.add(ViolationCode.KEY_DUPLICATED, "key occurs more than once")
        else:
            report.add(
                ViolationCode.KEY_MISSING,
                f"key {requested.surface!r} present but not marked; no blank can be created",
            )
            if len(matches) > constraints.max_key_occurrences:
                report.add(ViolationCode.KEY_DUPLICATED, "key occurs more than once")
        if len(raw.split()) > constraints.max_words:
            report.add(ViolationCode.TOO_LONG, f"sentence exceeds {constraints.max_words} words")
        return report, None
    except MultipleKeysError:
        report.add(ViolationCode.KEY_DUPLICATED, "more than one backtick-marked segment")
        return report, None
    return validate_stem(sentence, requested, constraints, group), sentence


def build_pos_check_prompt(key: TaggedKey, sentence: GeneratedSentence) -> str:
    """Optional extra judgment call asking whether the key kept its tag.

    The mechanical tag check is lexicon-based; this prompt delegates the
    same question to the model for words the lexicon cannot settle. Off by
    default in the pipeline.
    """
    return (
        POS_CHECK_PROMPT_TEMPLATE
        .replace("{sentence}", sentence.full_text)
        .replace("{word}", key.surface)
        .replace("{tag}", key.tag.value)
    )


def parse_pos_check(raw: str) -> bool:
    from .llm_gateway import extract_json
    from .errors import NonBooleanFieldError

    value, _ = extract_json(raw)
    verdict = value.get("retains_pos") if isinstance(value, dict) else None
    if not isinstance(verdict, bool):
        raise NonBooleanFieldError(f"retains_pos is {verdict!r}, expected a boolean")
    return verdict


def blank_out(sentence: GeneratedSentence, key: TaggedKey) -> QuestionStem:
    """Replace the key span with the blank literal.

    Substituting the span text back into the blank reproduces the original
    sentence byte-for-byte.
    """
    start, end = sentence.key_char_span
    text_with_blank = sentence.full_text[:start] + BLANK + sentence.full_text[end:]
    return QuestionStem(
        text_with_blank=text_with_blank,
        key=key,
        word_count=len(sentence.full_text.split()),
    )

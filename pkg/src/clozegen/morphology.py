"""POS tagging, inflection, and lemmatization over a bundled lexicon.

The engine is a curated lexicon (which word classes apply to each headword,
plus irregular forms) combined with regular suffix rules. Owning the rules
instead of delegating to an external tagger makes the known failure classes
of off-the-shelf taggers testable: Latin plurals are never generated,
singular forms never appear under NNS, and noun-only words never receive
adjective or verb tags.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Callable, Iterable, Mapping

from .errors import (
    EmptyConsensusError,
    TagNotApplicableError,
    UnknownPosTagError,
    UnknownWordError,
)

logger = logging.getLogger(__name__)

_VOWELS = "aeiou"


class PosTag(str, Enum):
    """Closed Penn Treebank tag vocabulary used throughout the pipeline."""

    NN = "NN"
    NNS = "NNS"
    VB = "VB"
    VBD = "VBD"
    VBG = "VBG"
    VBN = "VBN"
    VBP = "VBP"
    VBZ = "VBZ"
    JJ = "JJ"
    JJR = "JJR"
    JJS = "JJS"
    RB = "RB"
    RBR = "RBR"
    RBS = "RBS"

    @classmethod
    def parse(cls, raw: str) -> "PosTag":
        try:
            return cls(raw.strip().upper())
        except ValueError:
            raise UnknownPosTagError(f"unknown POS tag {raw!r}") from None


NOUN_TAGS = frozenset({PosTag.NN, PosTag.NNS})
VERB_TAGS = frozenset({PosTag.VB, PosTag.VBD, PosTag.VBG, PosTag.VBN, PosTag.VBP, PosTag.VBZ})
ADJ_TAGS = frozenset({PosTag.JJ, PosTag.JJR, PosTag.JJS})
ADV_TAGS = frozenset({PosTag.RB, PosTag.RBR, PosTag.RBS})


@dataclass(frozen=True)
class TaggedKey:
    """One surface form with its tag and the headword it belongs to."""

    surface: str
    tag: PosTag
    headword: str


@dataclass(frozen=True)
class WordGroup:
    """A headword together with its inflected forms organized by tag.

    Invariants enforced here are structural: a non-empty tag map, non-empty
    form sets, and no Latin "-ae" plurals. The lemma round-trip property is
    guaranteed by construction in build_word_group and checked by tests.
    """

    headword: str
    sublist_id: int
    inflections: Mapping[PosTag, frozenset[str]]

    def __post_init__(self):
        if not self.headword:
            raise ValueError("headword must be non-empty")
        if not self.inflections:
            raise ValueError(f"word group {self.headword!r} has no tags")
        for tag, forms in self.inflections.items():
            if not isinstance(tag, PosTag):
                raise UnknownPosTagError(f"tag {tag!r} outside the closed enumeration")
            if not forms:
                raise ValueError(f"word group {self.headword!r} has an empty form set for {tag.value}")
            for form in forms:
                if form.endswith("ae"):
                    raise ValueError(
                        f"Latin plural {form!r} is excluded by design; use the standard plural"
                    )

    def tags(self) -> tuple[PosTag, ...]:
        return tuple(sorted(self.inflections, key=lambda t: t.value))

    def forms_for(self, tag: PosTag) -> tuple[str, ...]:
        return tuple(sorted(self.inflections.get(tag, frozenset())))


@dataclass(frozen=True)
class ConsensusReport:
    """Outcome of cross-validating one headword's tags between two taggers."""

    headword: str
    accepted: frozenset[PosTag]
    rejected_primary_only: frozenset[PosTag]
    rejected_secondary_only: frozenset[PosTag]


# -- regular suffix rules -----------------------------------------------------


def _pluralize(word: str) -> str:
    if re.search(r"(s|x|z|ch|sh)$", word):
        return word + "es"
    if len(word) > 1 and word.endswith("y") and word[-2] not in _VOWELS:
        return word[:-1] + "ies"
    return word + "s"


def _third_person(word: str) -> str:
    # identical spelling rule to noun pluralization
    return _pluralize(word)


def _past(word: str, double: bool) -> str:
    if double:
        return word + word[-1] + "ed"
    if word.endswith("e"):
        return word + "d"
    if len(word) > 1 and word.endswith("y") and word[-2] not in _VOWELS:
        return word[:-1] + "ied"
    return word + "ed"


def _gerund(word: str, double: bool) -> str:
    if double:
        return word + word[-1] + "ing"
    if word.endswith("ie"):
        return word[:-2] + "ying"
    if word.endswith("e") and not word.endswith("ee") and not word.endswith("oe") and not word.endswith("ye"):
        return word[:-1] + "ing"
    return word + "ing"


def _comparative(word: str) -> str:
    if word.endswith("e"):
        return word + "r"
    if len(word) > 1 and word.endswith("y") and word[-2] not in _VOWELS:
        return word[:-1] + "ier"
    if _wants_doubling(word):
        return word + word[-1] + "er"
    return word + "er"


def _superlative(word: str) -> str:
    if word.endswith("e"):
        return word + "st"
    if len(word) > 1 and word.endswith("y") and word[-2] not in _VOWELS:
        return word[:-1] + "iest"
    if _wants_doubling(word):
        return word + word[-1] + "est"
    return word + "est"


def _wants_doubling(word: str) -> bool:
    # CVC monosyllable heuristic; multisyllabic stress is a lexicon flag
    return (
        len(word) >= 3
        and word[-1] not in _VOWELS + "wxy"
        and word[-2] in _VOWELS
        and word[-3] not in _VOWELS
        and sum(ch in _VOWELS for ch in word) == 1
    )


# -- lexicon ------------------------------------------------------------------

_CLASS_TAGS = {"N": "noun", "V": "verb", "J": "adjective", "R": "adverb"}
_KNOWN_FLAGS = {"uncountable", "double", "gradable"}


@dataclass(frozen=True)
class LexiconEntry:
    headword: str
    classes: tuple[str, ...]
    flags: frozenset[str] = frozenset()
    overrides: Mapping[PosTag, frozenset[str]] = field(default_factory=dict)


class Lexicon:
    """Headword records plus a reverse surface-form index for lemmatization."""

    def __init__(self, entries: Iterable[LexiconEntry]):
        self._entries: dict[str, LexiconEntry] = {}
        for entry in entries:
            if entry.headword in self._entries:
                raise ValueError(f"duplicate lexicon entry {entry.headword!r}")
            self._entries[entry.headword] = entry
        self._reverse: dict[tuple[str, PosTag], str] = {}
        for headword, entry in self._entries.items():
            for tag in self._entry_tags(entry):
                for form in self._entry_forms(entry, tag):
                    self._reverse.setdefault((form, tag), headword)

    def __contains__(self, headword: str) -> bool:
        return headword in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("|", 3)
            if len(parts) != 4:
                raise ValueError(f"lexicon line {lineno}: expected 4 |-separated fields")
            headword, classes_raw, flags_raw, overrides_raw = parts
            classes = tuple(c.strip() for c in classes_raw.split(",") if c.strip())
            for c in classes:
                if c not in _CLASS_TAGS:
                    raise ValueError(f"lexicon line {lineno}: unknown class {c!r}")
            flags = frozenset(f.strip() for f in flags_raw.split(",") if f.strip())
            unknown = flags - _KNOWN_FLAGS
            if unknown:
                raise ValueError(f"lexicon line {lineno}: unknown flags {sorted(unknown)}")
            overrides: dict[PosTag, frozenset[str]] = {}
            if overrides_raw:
                for clause in overrides_raw.split(";"):
                    tag_raw, _, forms_raw = clause.partition("=")
                    tag = PosTag.parse(tag_raw)
                    forms = frozenset(f.strip() for f in forms_raw.split("|") if f.strip())
                    if not forms:
                        raise ValueError(f"lexicon line {lineno}: empty override for {tag.value}")
                    overrides[tag] = forms
            entries.append(LexiconEntry(headword.strip().lower(), classes, flags, overrides))
        return cls(entries)

    @classmethod
    def bundled(cls) -> "Lexicon":
        text = resources.files("clozegen.data").joinpath("lexicon.txt").read_text("utf-8")
        return cls.from_text(text)

    # -- tag derivation ------------------------------------------------------

    def _entry_tags(self, entry: LexiconEntry) -> set[PosTag]:
        tags: set[PosTag] = set()
        for cls_code in entry.classes:
            if cls_code == "N":
                tags.add(PosTag.NN)
                if "uncountable" not in entry.flags:
                    tags.add(PosTag.NNS)
            elif cls_code == "V":
                tags.update({PosTag.VB, PosTag.VBD, PosTag.VBG, PosTag.VBP, PosTag.VBZ})
                # VBN is listed only when the participle differs from the past
                vbn = entry.overrides.get(PosTag.VBN)
                if vbn and vbn != self._entry_forms(entry, PosTag.VBD):
                    tags.add(PosTag.VBN)
            elif cls_code == "J":
                tags.add(PosTag.JJ)
                if "gradable" in entry.flags:
                    tags.update({PosTag.JJR, PosTag.JJS})
            elif cls_code == "R":
                tags.add(PosTag.RB)
                if "gradable" in entry.flags:
                    tags.update({PosTag.RBR, PosTag.RBS})
        return tags

    def _entry_forms(self, entry: LexiconEntry, tag: PosTag) -> frozenset[str]:
        if tag in entry.overrides:
            return entry.overrides[tag]
        word = entry.headword
        double = "double" in entry.flags
        if tag in (PosTag.NN, PosTag.VB, PosTag.VBP, PosTag.JJ, PosTag.RB):
            return frozenset({word})
        if tag in (PosTag.NNS, PosTag.VBZ):
            return frozenset({_pluralize(word)})
        if tag in (PosTag.VBD, PosTag.VBN):
            return frozenset({_past(word, double)})
        if tag is PosTag.VBG:
            return frozenset({_gerund(word, double)})
        if tag in (PosTag.JJR, PosTag.RBR):
            return frozenset({_comparative(word)})
        if tag in (PosTag.JJS, PosTag.RBS):
            return frozenset({_superlative(word)})
        raise TagNotApplicableError(f"no form rule for tag {tag.value}")

    # -- public operations ----------------------------------------------------

    def tag_pos(self, headword: str) -> set[PosTag]:
        """Tags applicable to a headword; falls back to suffix guessing.

        Guessed tags are logged at WARNING level so pipeline runs surface
        the low-confidence words.
        """
        entry = self._entries.get(headword)
        if entry is not None:
            return self._entry_tags(entry)
        guessed = _guess_tags(headword)
        if not guessed:
            raise UnknownWordError(f"{headword!r} not in lexicon and no rule applies")
        logger.warning("low-confidence tags for %r (not in lexicon): %s",
                       headword, sorted(t.value for t in guessed))
        return guessed

    def inflect(self, headword: str, tag: PosTag) -> set[str]:
        """Surface forms of a headword under one tag."""
        applicable = self.tag_pos(headword)
        if tag not in applicable:
            raise TagNotApplicableError(f"{tag.value} does not apply to {headword!r}")
        entry = self._entries.get(headword)
        if entry is not None:
            return set(self._entry_forms(entry, tag))
        return set(self._entry_forms(LexiconEntry(headword, ("N", "V", "J", "R")), tag))

    def lemma_lookup(self, surface: str, tag: PosTag) -> tuple[str, bool]:
        """Headword for a surface form, plus whether the lexicon knows it.

        Unknown surfaces fall back to suffix stripping verified against
        lexicon headwords; if that also fails, the surface comes back
        unchanged with in_lexicon=False.
        """
        if not surface:
            raise ValueError("surface must be non-empty")
        word = surface.lower()
        hit = self._reverse.get((word, tag))
        if hit is not None:
            return hit, True
        for candidate in _deinflection_candidates(word):
            if candidate in self._entries:
                return candidate, True
        return surface, False

    def lemma_of(self, surface: str, tag: PosTag) -> str:
        return self.lemma_lookup(surface, tag)[0]


def _guess_tags(headword: str) -> set[PosTag]:
    """Suffix heuristics for words outside the lexicon."""
    if not re.fullmatch(r"[a-z]+(?:[-'][a-z]+)*", headword) or not any(c in _VOWELS for c in headword):
        return set()
    if headword.endswith("ly"):
        return {PosTag.RB}
    if len(headword) > 4 and headword.endswith(("ise", "ize", "ate", "ify")):
        return {PosTag.VB, PosTag.VBD, PosTag.VBG, PosTag.VBP, PosTag.VBZ}
    if headword.endswith(("ous", "ive", "al", "ic", "able", "ible", "ful", "less", "ant", "ent")):
        return {PosTag.JJ}
    return {PosTag.NN, PosTag.NNS}


def _deinflection_candidates(word: str):
    """Plausible base spellings for an inflected surface, most specific first."""
    if word.endswith("ies") and len(word) > 4:
        yield word[:-3] + "y"
    if word.endswith("es") and len(word) > 3:
        yield word[:-2]
        yield word[:-1]
    if word.endswith("s") and len(word) > 2:
        yield word[:-1]
    if word.endswith("ied") and len(word) > 4:
        yield word[:-3] + "y"
    if word.endswith("ed") and len(word) > 3:
        yield word[:-2]
        yield word[:-1]
        if len(word) > 4 and word[-3] == word[-4]:
            yield word[:-3]
    if word.endswith("ing") and len(word) > 4:
        yield word[:-3]
        yield word[:-3] + "e"
        if len(word) > 5 and word[-4] == word[-5]:
            yield word[:-4]
    yield word


_default_lexicon: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _default_lexicon
    if _default_lexicon is None:
        _default_lexicon = Lexicon.bundled()
    return _default_lexicon


def tag_pos(headword: str, lexicon: Lexicon | None = None) -> set[PosTag]:
    return (lexicon or default_lexicon()).tag_pos(headword)


def inflect(headword: str, tag: PosTag, lexicon: Lexicon | None = None) -> set[str]:
    return (lexicon or default_lexicon()).inflect(headword, tag)


def lemma_of(surface: str, tag: PosTag, lexicon: Lexicon | None = None) -> str:
    return (lexicon or default_lexicon()).lemma_of(surface, tag)


def consensus_tags(headword: str, primary: set[PosTag], secondary: set[PosTag]) -> ConsensusReport:
    """Cross-validate tags between two taggers; only the intersection survives."""
    accepted = frozenset(primary) & frozenset(secondary)
    if not accepted:
        raise EmptyConsensusError(
            f"taggers agree on no tag for {headword!r}: "
            f"primary={sorted(t.value for t in primary)}, "
            f"secondary={sorted(t.value for t in secondary)}"
        )
    return ConsensusReport(
        headword=headword,
        accepted=accepted,
        rejected_primary_only=frozenset(primary) - accepted,
        rejected_secondary_only=frozenset(secondary) - accepted,
    )


SecondaryTagger = Callable[[str], set[PosTag]]


def build_word_group(
    entry,
    secondary_tagger: SecondaryTagger | None = None,
    lexicon: Lexicon | None = None,
) -> WordGroup:
    """Expand one headword entry into its word group.

    With a secondary tagger, only tags recognized by both sources are kept
    (EmptyConsensusError propagates when they share none).
    """
    lex = lexicon or default_lexicon()
    primary = lex.tag_pos(entry.headword)
    if secondary_tagger is not None:
        report = consensus_tags(entry.headword, primary, secondary_tagger(entry.headword))
        accepted = report.accepted
    else:
        accepted = frozenset(primary)
    inflections = {tag: frozenset(lex.inflect(entry.headword, tag)) for tag in sorted(accepted, key=lambda t: t.value)}
    return WordGroup(headword=entry.headword, sublist_id=entry.sublist_id, inflections=inflections)


def load_gold_table(path) -> dict[str, dict[str, list[str]]]:
    """Read a gold tag/forms table (JSON, headword -> tag -> sorted forms)."""
    with open(path, encoding="utf-8") as fh:
        table = json.load(fh)
    return {k: v for k, v in table.items() if not k.startswith("_")}

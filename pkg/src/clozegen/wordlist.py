"""Headword list ingestion and word-group CSV persistence.

Two file schemas live here:

* headword list: ``headword,sublist`` (one row per headword)
* word groups:   ``headword,sublist,pos_tag,forms`` with one row per
  (headword, pos_tag) and ``forms`` as a ``|``-separated list

Both are UTF-8 with LF line endings. Word-group files may carry an
optional leading ``# source_label: ...`` comment so a set round-trips
field-for-field through write/load.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import (
    DuplicateHeadwordError,
    EmptyListError,
    MalformedCsvError,
)
from .morphology import PosTag, WordGroup

_HEADWORD_RE = re.compile(r"[a-z]+(?:[-'][a-z]+)*")

HEADWORD_HEADER = ["headword", "sublist"]
GROUP_HEADER = ["headword", "sublist", "pos_tag", "forms"]
_LABEL_PREFIX = "# source_label:"


@dataclass(frozen=True)
class HeadwordEntry:
    """One row of the input word list."""

    headword: str
    sublist_id: int

    def __post_init__(self):
        if not _HEADWORD_RE.fullmatch(self.headword):
            raise ValueError(f"invalid headword {self.headword!r}")
        if self.sublist_id < 1:
            raise ValueError(f"sublist_id must be >= 1, got {self.sublist_id}")


@dataclass
class WordGroupSet:
    """Ordered collection of word groups with unique headwords."""

    groups: list[WordGroup] = field(default_factory=list)
    source_label: str = ""

    def __post_init__(self):
        seen = set()
        for group in self.groups:
            if group.headword in seen:
                raise DuplicateHeadwordError(f"duplicate headword {group.headword!r}")
            seen.add(group.headword)

    def __iter__(self) -> Iterator[WordGroup]:
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def __getitem__(self, index: int) -> WordGroup:
        return self.groups[index]

    def get(self, headword: str) -> WordGroup | None:
        for group in self.groups:
            if group.headword == headword:
                return group
        return None


def _rows(text: str):
    """CSV rows with stdlib parser errors mapped to MalformedCsvError."""
    reader = csv.reader(io.StringIO(text, newline=""))
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise MalformedCsvError(f"CSV parse failure: {exc}") from exc
        yield row


def _decode(raw) -> str:
    if isinstance(raw, (str, Path)):
        data = Path(raw).read_bytes()
    elif isinstance(raw, bytes):
        data = raw
    elif hasattr(raw, "read"):
        data = raw.read()
        if isinstance(data, str):
            return data
    else:
        raise TypeError(f"unsupported input {type(raw)!r}")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedCsvError(f"input is not valid UTF-8: {exc}") from exc


def parse_headword_list(raw) -> list[HeadwordEntry]:
    """Parse a ``headword,sublist`` CSV into entries.

    Rows with a blank or malformed headword are rejected (MalformedCsvError),
    never silently skipped; a file with a valid header but zero data rows is
    an EmptyListError.
    """
    text = _decode(raw)
    reader = _rows(text)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedCsvError("empty file, expected a headword,sublist header") from None
    if [h.strip().lower() for h in header] != HEADWORD_HEADER:
        raise MalformedCsvError(f"bad header {header!r}, expected {HEADWORD_HEADER!r}")
    entries: list[HeadwordEntry] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedCsvError(f"line {lineno}: expected 2 columns, got {len(row)}")
        headword = row[0].strip().lower()
        if not headword:
            raise MalformedCsvError(f"line {lineno}: blank headword")
        if not _HEADWORD_RE.fullmatch(headword):
            raise MalformedCsvError(f"line {lineno}: invalid headword {row[0]!r}")
        try:
            sublist_id = int(row[1])
        except ValueError:
            raise MalformedCsvError(f"line {lineno}: sublist {row[1]!r} is not an integer") from None
        if sublist_id < 1:
            raise MalformedCsvError(f"line {lineno}: sublist must be >= 1")
        entries.append(HeadwordEntry(headword=headword, sublist_id=sublist_id))
    if not entries:
        raise EmptyListError("word list contains no data rows")
    return entries


def write_word_groups(group_set: WordGroupSet, destination) -> None:
    """Serialize a word-group set; load_word_groups inverts this exactly."""
    if not group_set.groups:
        raise EmptyListError("refusing to write an empty word-group set")
    buffer = io.StringIO()
    if group_set.source_label:
        buffer.write(f"{_LABEL_PREFIX} {group_set.source_label}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(GROUP_HEADER)
    for group in group_set.groups:
        for tag in group.tags():
            writer.writerow([
                group.headword,
                group.sublist_id,
                tag.value,
                "|".join(group.forms_for(tag)),
            ])
    payload = buffer.getvalue()
    if hasattr(destination, "write"):
        destination.write(payload)
    else:
        Path(destination).write_text(payload, encoding="utf-8", newline="")


def load_word_groups(source, source_label: str | None = None) -> WordGroupSet:
    """Load a word-group CSV written by write_word_groups or hand-authored.

    Rows for one headword merge into a single group; a repeated
    (headword, pos_tag) pair or a headword with conflicting sublists is a
    DuplicateHeadwordError.
    """
    text = _decode(source)
    label = source_label if source_label is not None else ""
    if text.startswith(_LABEL_PREFIX):
        first_line, _, rest = text.partition("\n")
        if source_label is None:
            label = first_line[len(_LABEL_PREFIX):].strip()
        text = rest
    reader = _rows(text)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedCsvError("empty file, expected a word-group header") from None
    if [h.strip().lower() for h in header] != GROUP_HEADER:
        raise MalformedCsvError(f"bad header {header!r}, expected {GROUP_HEADER!r}")

    order: list[str] = []
    sublists: dict[str, int] = {}
    tag_maps: dict[str, dict[PosTag, frozenset[str]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise MalformedCsvError(f"line {lineno}: expected 4 columns, got {len(row)}")
        headword = row[0].strip().lower()
        if not headword:
            raise MalformedCsvError(f"line {lineno}: blank headword")
        try:
            sublist_id = int(row[1])
        except ValueError:
            raise MalformedCsvError(f"line {lineno}: sublist {row[1]!r} is not an integer") from None
        tag = PosTag.parse(row[2])
        forms = frozenset(f.strip() for f in row[3].split("|") if f.strip())
        if not forms:
            raise MalformedCsvError(f"line {lineno}: no forms for {headword}/{tag.value}")
        if headword not in sublists:
            order.append(headword)
            sublists[headword] = sublist_id
            tag_maps[headword] = {}
        elif sublists[headword] != sublist_id:
            raise DuplicateHeadwordError(
                f"line {lineno}: {headword!r} redefined with a different sublist"
            )
        if tag in tag_maps[headword]:
            raise DuplicateHeadwordError(f"line {lineno}: duplicate row for {headword}/{tag.value}")
        tag_maps[headword][tag] = forms

    if not order:
        raise EmptyListError("word-group file contains no data rows")
    groups = [
        WordGroup(headword=h, sublist_id=sublists[h], inflections=tag_maps[h])
        for h in order
    ]
    return WordGroupSet(groups=groups, source_label=label)


def build_group_set(
    entries: Iterable[HeadwordEntry],
    secondary_tagger=None,
    lexicon=None,
    source_label: str = "",
    on_empty_consensus=None,
) -> WordGroupSet:
    """Expand headword entries into a full word-group set.

    on_empty_consensus, when given, receives (entry, error) for headwords
    the taggers cannot agree on; those words are skipped instead of
    aborting the whole set.
    """
    from .errors import EmptyConsensusError
    from .morphology import build_word_group

    groups = []
    for entry in entries:
        try:
            groups.append(build_word_group(entry, secondary_tagger, lexicon))
        except EmptyConsensusError as exc:
            if on_empty_consensus is None:
                raise
            on_empty_consensus(entry, exc)
    return WordGroupSet(groups=groups, source_label=source_label)

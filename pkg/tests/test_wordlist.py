"""Word list parsing and word-group file round-trips."""

import io
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clozegen.errors import (
    DuplicateHeadwordError,
    EmptyListError,
    MalformedCsvError,
    UnknownPosTagError,
)
from clozegen.morphology import PosTag, WordGroup, build_word_group
from clozegen.wordlist import (
    HeadwordEntry,
    WordGroupSet,
    load_word_groups,
    parse_headword_list,
    write_word_groups,
)


def test_parse_single_row():
    entries = parse_headword_list(b"headword,sublist\nanalyse,1\n")
    assert entries == [HeadwordEntry("analyse", 1)]


def test_parse_awl_sublist1_has_60_headwords():
    raw = resources.files("clozegen.data").joinpath("awl_sublist1.csv").read_bytes()
    entries = parse_headword_list(raw)
    assert len(entries) == 60
    assert len({e.headword for e in entries}) == 60
    assert all(e.sublist_id == 1 for e in entries)


def test_parse_rejects_blank_headword():
    with pytest.raises(MalformedCsvError):
        parse_headword_list(b"headword,sublist\n,1\n")


def test_parse_rejects_bad_header():
    with pytest.raises(MalformedCsvError):
        parse_headword_list(b"word,list\nanalyse,1\n")


def test_parse_rejects_wrong_column_count():
    with pytest.raises(MalformedCsvError):
        parse_headword_list(b"headword,sublist\nanalyse,1,extra\n")


def test_parse_rejects_non_integer_sublist():
    with pytest.raises(MalformedCsvError):
        parse_headword_list(b"headword,sublist\nanalyse,one\n")


def test_parse_rejects_invalid_headword_characters():
    with pytest.raises(MalformedCsvError):
        parse_headword_list(b"headword,sublist\nan4lyse,1\n")


def test_parse_empty_list():
    with pytest.raises(EmptyListError):
        parse_headword_list(b"headword,sublist\n")


def test_parse_lowercases_headwords():
    entries = parse_headword_list(b"headword,sublist\nAnalyse,1\n")
    assert entries[0].headword == "analyse"


def _group(headword, sublist, inflections):
    return WordGroup(headword, sublist, {t: frozenset(f) for t, f in inflections.items()})


def test_write_load_round_trip_distribute(tmp_path):
    group = build_word_group(HeadwordEntry("distribute", 1))
    assert set(group.inflections) == {PosTag.VB, PosTag.VBD, PosTag.VBG, PosTag.VBP, PosTag.VBZ}
    original = WordGroupSet(groups=[group], source_label="demo")
    path = tmp_path / "groups.csv"
    write_word_groups(original, path)
    loaded = load_word_groups(path)
    assert loaded.groups == original.groups
    assert loaded.source_label == original.source_label


def test_write_rejects_empty_set(tmp_path):
    with pytest.raises(EmptyListError):
        write_word_groups(WordGroupSet(groups=[]), tmp_path / "empty.csv")


def test_sixty_single_tag_groups_give_sixty_rows(tmp_path):
    groups = [
        _group("w" + "abcdefghijklmnopqrstuvwxyz"[i % 26] + "z" * (i // 26), 1,
               {PosTag.NN: {f"form{i}"}})
        for i in range(60)
    ]
    original = WordGroupSet(groups=groups)
    path = tmp_path / "sixty.csv"
    write_word_groups(original, path)
    data_rows = [line for line in path.read_text("utf-8").splitlines()[1:] if line]
    assert len(data_rows) == 60
    assert len(load_word_groups(path)) == 60


def test_load_rejects_duplicate_headword_rows():
    text = (
        "headword,sublist,pos_tag,forms\n"
        "analyse,1,VB,analyse\n"
        "analyse,1,VB,analyses\n"
    )
    with pytest.raises(DuplicateHeadwordError):
        load_word_groups(io.StringIO(text))


def test_load_rejects_conflicting_sublists():
    text = (
        "headword,sublist,pos_tag,forms\n"
        "analyse,1,VB,analyse\n"
        "analyse,2,VBZ,analyses\n"
    )
    with pytest.raises(DuplicateHeadwordError):
        load_word_groups(io.StringIO(text))


def test_load_rejects_unknown_pos_tag():
    text = "headword,sublist,pos_tag,forms\nanalyse,1,XX,analyse\n"
    with pytest.raises(UnknownPosTagError):
        load_word_groups(io.StringIO(text))


def test_load_rejects_bad_header():
    with pytest.raises(MalformedCsvError):
        load_word_groups(io.StringIO("a,b,c\n1,2,3\n"))


def test_load_empty_file():
    with pytest.raises(EmptyListError):
        load_word_groups(io.StringIO("headword,sublist,pos_tag,forms\n"))


_headwords = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=2, max_size=8)
_forms = st.sets(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=2, max_size=10)
    .filter(lambda s: not s.endswith("ae")),
    min_size=1, max_size=3,
)


@st.composite
def _group_sets(draw):
    headwords = draw(st.lists(_headwords, min_size=1, max_size=5, unique=True))
    groups = []
    for headword in headwords:
        tags = draw(st.sets(st.sampled_from(sorted(PosTag, key=lambda t: t.value)),
                            min_size=1, max_size=4))
        groups.append(WordGroup(
            headword,
            draw(st.integers(min_value=1, max_value=10)),
            {tag: frozenset(draw(_forms)) for tag in tags},
        ))
    return WordGroupSet(groups=groups, source_label=draw(st.sampled_from(["", "fixture", "awl"])))


@settings(max_examples=50, deadline=None)
@given(_group_sets())
def test_round_trip_identity_property(group_set):
    buffer = io.StringIO()
    write_word_groups(group_set, buffer)
    loaded = load_word_groups(io.StringIO(buffer.getvalue()))
    assert loaded.groups == group_set.groups
    assert loaded.source_label == group_set.source_label


def test_headword_uniqueness_enforced():
    group = _group("analyse", 1, {PosTag.VB: {"analyse"}})
    with pytest.raises(DuplicateHeadwordError):
        WordGroupSet(groups=[group, group])


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=200))
def test_parsing_is_total_over_arbitrary_bytes(raw):
    # every byte stream yields a value or one declared error, never a crash
    try:
        entries = parse_headword_list(raw)
    except (MalformedCsvError, EmptyListError):
        return
    assert entries


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=300))
def test_group_loading_is_total_over_arbitrary_text(text):
    try:
        groups = load_word_groups(io.StringIO(text))
    except (MalformedCsvError, EmptyListError, DuplicateHeadwordError,
            UnknownPosTagError, ValueError):
        return
    assert len(groups) > 0

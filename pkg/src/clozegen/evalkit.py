"""Inter-rater agreement statistics and error-annotation tallies.

Agreement between two reviewers is chance-corrected with Cohen's kappa,
kappa = (p_o - p_e) / (1 - p_e), where p_o is the observed agreement
fraction and p_e the chance agreement from the raters' marginal
proportions. Percent agreement and well-formedness rates are kept as
exact fractions so reports can show both the rational and decimal forms.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyInputError,
    InsufficientOverlapError,
    LengthMismatchError,
    MissingTieBreakError,
    UnknownCategoryError,
)

APPROPRIATE = "appropriate"
INAPPROPRIATE = "inappropriate"

RATINGS_HEADER = ["target_id", "target_kind", "reviewer_id", "verdict", "comment"]

# Seed vocabulary for annotation labels; extensible via a JSON file of
# {category: [subcategory, ...]}.
DEFAULT_CATEGORY_VOCABULARY: dict[str, tuple[str, ...]] = {
    "Mechanical": ("Capitalization",),
    "Syntax": (
        "Determiner",
        "Noun number",
        "Clause conjunction",
        "POS",
        "Verb transitivity",
        "Article match",
        "Inflection",
    ),
    "Semantics": ("Perplexity", "Acceptable answers"),
    "Key fitness": ("Rare use/collocation", "Syntactic unfitness"),
    "Others": ("Similar distractors",),
}


@dataclass(frozen=True)
class ReviewRecord:
    """One reviewer's verdict on one stem or distractor."""

    target_id: str
    target_kind: str  # "stem" | "distractor"
    reviewer_id: str
    verdict: str
    comment: str = ""

    def __post_init__(self):
        if self.verdict not in (APPROPRIATE, INAPPROPRIATE):
            raise ValueError(f"verdict must be appropriate|inappropriate, got {self.verdict!r}")
        if self.verdict == INAPPROPRIATE and not self.comment.strip():
            raise ValueError("an inappropriate verdict requires a comment")


@dataclass(frozen=True)
class AnnotationLabel:
    target_id: str
    category: str
    subcategory: str


@dataclass(frozen=True)
class AgreementStats:
    kappa: float
    percent_agreement: Fraction
    n: int
    degenerate: bool = False


def _check_sequences(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise LengthMismatchError(f"sequence lengths differ: {len(a)} vs {len(b)}")
    if not a:
        raise EmptyInputError("rating sequences are empty")


def kappa_detailed(a: Sequence, b: Sequence) -> tuple[float, bool]:
    """Cohen's kappa plus a degeneracy flag.

    When both raters are constant and identical, p_e = 1 and the formula
    is 0/0; observed agreement is perfect, so the convention here is
    kappa = 1 with degenerate=True.
    """
    _check_sequences(a, b)
    n = len(a)
    matches = sum(1 for x, y in zip(a, b) if x == y)
    p_o = Fraction(matches, n)
    categories = set(a) | set(b)
    p_e = Fraction(0)
    for category in categories:
        p_e += Fraction(sum(1 for x in a if x == category), n) * Fraction(
            sum(1 for y in b if y == category), n
        )
    if p_e == 1:
        return 1.0, True
    return float((p_o - p_e) / (1 - p_e)), False


def cohen_kappa(a: Sequence, b: Sequence) -> float:
    return kappa_detailed(a, b)[0]


def percent_agreement(a: Sequence, b: Sequence) -> Fraction:
    """Fraction of positions where the two raters agree, exact."""
    _check_sequences(a, b)
    return Fraction(sum(1 for x, y in zip(a, b) if x == y), len(a))


def resolve(a: Sequence, b: Sequence, third: Mapping[int, str]) -> list:
    """Final verdicts: agreement stands, a third rater settles the rest."""
    _check_sequences(a, b)
    final = []
    for index, (x, y) in enumerate(zip(a, b)):
        if x == y:
            final.append(x)
        elif index in third:
            final.append(third[index])
        else:
            raise MissingTieBreakError(index)
    return final


def tally(
    labels: Iterable[AnnotationLabel],
    vocabulary: Mapping[str, Sequence[str]] | None = None,
) -> dict[str, dict[str, int]]:
    """Instance counts per (category, subcategory).

    A target labeled under two subcategories counts once per label, so
    totals track labels, not targets.
    """
    vocab = vocabulary if vocabulary is not None else DEFAULT_CATEGORY_VOCABULARY
    table: dict[str, dict[str, int]] = {}
    for label in labels:
        if label.category not in vocab:
            raise UnknownCategoryError(f"unknown category {label.category!r}")
        if label.subcategory not in vocab[label.category]:
            raise UnknownCategoryError(
                f"subcategory {label.subcategory!r} not in category {label.category!r}"
            )
        table.setdefault(label.category, {})
        table[label.category][label.subcategory] = (
            table[label.category].get(label.subcategory, 0) + 1
        )
    return table


def tally_total(table: Mapping[str, Mapping[str, int]]) -> int:
    return sum(count for subs in table.values() for count in subs.values())


def wellformedness(final_verdicts: Sequence[str], universe: int) -> Fraction:
    """Appropriate count over the whole universe of targets."""
    if universe < len(final_verdicts):
        raise ValueError("universe smaller than the verdict list")
    if universe == 0:
        raise EmptyInputError("universe is empty")
    appropriate = sum(1 for v in final_verdicts if v == APPROPRIATE)
    return Fraction(appropriate, universe)


def load_vocabulary(path) -> dict[str, tuple[str, ...]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {category: tuple(subs) for category, subs in raw.items()}


# -- ratings files -------------------------------------------------------------


def write_ratings_csv(records: Iterable[ReviewRecord], destination) -> None:
    rows = [[r.target_id, r.target_kind, r.reviewer_id, r.verdict, r.comment] for r in records]
    if hasattr(destination, "write"):
        writer = csv.writer(destination, lineterminator="\n")
        writer.writerow(RATINGS_HEADER)
        writer.writerows(rows)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RATINGS_HEADER)
            writer.writerows(rows)


def load_ratings_csv(source) -> list[ReviewRecord]:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != RATINGS_HEADER:
        raise ValueError(f"bad ratings header {header!r}, expected {RATINGS_HEADER!r}")
    records = []
    for row in reader:
        if not row:
            continue
        records.append(ReviewRecord(*row))
    return records


def ratings_to_csv_text(records: Iterable[ReviewRecord]) -> str:
    buffer = io.StringIO()
    write_ratings_csv(records, buffer)
    return buffer.getvalue()


# -- reports -------------------------------------------------------------------


def agreement_report(records: Iterable[ReviewRecord]) -> dict:
    """Per-target-kind agreement stats for the two overlapping reviewers.

    Reviewers are paired per kind by largest shared target set (ties
    broken by reviewer id); raises InsufficientOverlapError when no two
    reviewers share rated targets of a kind at all.
    """
    by_kind: dict[str, dict[str, dict[str, str]]] = {}
    for record in records:
        by_kind.setdefault(record.target_kind, {}).setdefault(
            record.reviewer_id, {}
        )[record.target_id] = record.verdict

    report: dict[str, dict] = {}
    for kind in sorted(by_kind):
        reviewers = sorted(by_kind[kind])
        best: tuple[int, str, str] | None = None
        for i, first in enumerate(reviewers):
            for second in reviewers[i + 1:]:
                overlap = len(set(by_kind[kind][first]) & set(by_kind[kind][second]))
                candidate = (overlap, first, second)
                if overlap and (best is None or overlap > best[0]):
                    best = candidate
        if best is None:
            continue
        _, first, second = best
        shared = sorted(set(by_kind[kind][first]) & set(by_kind[kind][second]))
        a = [by_kind[kind][first][t] for t in shared]
        b = [by_kind[kind][second][t] for t in shared]
        kappa, degenerate = kappa_detailed(a, b)
        agreement = percent_agreement(a, b)
        report[kind] = {
            "reviewers": [first, second],
            "n": len(shared),
            "kappa": kappa,
            "kappa_degenerate": degenerate,
            "percent_agreement": float(agreement),
            "percent_agreement_exact": f"{agreement.numerator}/{agreement.denominator}",
        }
    if not report:
        raise InsufficientOverlapError("no target kind has two reviewers with shared targets")
    return report


def report_json(report: Mapping) -> str:
    """Canonical JSON rendering shared by the CLI and the review service."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_text(report: Mapping) -> str:
    lines = []
    for kind, stats in report.items():
        lines.append(f"{kind}: kappa={stats['kappa']:.4f} "
                     f"agreement={stats['percent_agreement_exact']} "
                     f"(={stats['percent_agreement']:.4f}) n={stats['n']} "
                     f"reviewers={','.join(stats['reviewers'])}")
    return "\n".join(lines) + "\n"

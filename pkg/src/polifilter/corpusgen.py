"""Training-corpus construction: criteria-based selection and 60/20/20 split.

The positive ("politics") class is drawn from records already categorized
as political science; the negative ("multi") class from records classified
elsewhere that also carry no token matching an exclusion pattern
(default "politi*") anywhere in title, keywords, or abstract. Selection is
a pure streaming filter; the split is a seeded, stratified partition.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .ingest import record_from_dict, record_to_dict
from .langdetect import LanguageDetector, detect_language
from .records import (
    MetadataRecord,
    ddc_in_politics_range,
    has_valid_abstract,
    parse_ddc_code,
    tokenize,
)
from .lexicon import LexiconError, pattern_matches
from .softclf import LABELS

LabeledRecord = tuple[MetadataRecord, str]

DEFAULT_EXCLUSION_PATTERN = "politi*"


class DdcRule(Enum):
    """IN selects the politics range; NOT_IN requires at least one parseable
    code with none in range (no codes at all is no classification)."""

    IN_320_328 = "in-320-328"
    NOT_320_328 = "not-320-328"


def _ddc_rule_holds(record: MetadataRecord, rule: DdcRule) -> bool:
    if rule is DdcRule.IN_320_328:
        return ddc_in_politics_range(record)
    codes = [num for code in record.ddc if (num := parse_ddc_code(code)) is not None]
    return bool(codes) and not ddc_in_politics_range(record)


@dataclass(frozen=True)
class SelectionCriteria:
    """Everything a record must satisfy to enter the corpus under one label.

    ``min_year`` is strict ("published after"): a record passes only when
    its year is greater; set ``min_year_inclusive`` to relax the boundary.
    For the multi class the exclusion pattern defaults to "politi*" and
    must not be removed.
    """

    class_target: str
    ddc_rule: DdcRule
    languages: frozenset[str]
    doctypes: frozenset[str] = frozenset({"article", "review"})
    min_year: int | None = None
    min_year_inclusive: bool = False
    require_abstract: bool = True
    min_abstract_words: int = 20
    exclusion_pattern: str | None = None
    journal_allowlist: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.class_target not in LABELS:
            raise ValueError(f"class_target must be one of {LABELS}")
        if not self.languages:
            raise ValueError("languages must be non-empty")
        if not self.doctypes:
            raise ValueError("doctypes must be non-empty")
        if self.min_abstract_words < 1:
            raise ValueError("min_abstract_words must be >= 1")
        for name in ("languages", "doctypes", "journal_allowlist"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))
        if self.class_target == "multi" and self.exclusion_pattern is None:
            object.__setattr__(self, "exclusion_pattern", DEFAULT_EXCLUSION_PATTERN)
        if self.exclusion_pattern is not None:
            if not self.exclusion_pattern.strip():
                raise ValueError("exclusion_pattern must not be blank")
            try:
                pattern_matches(self.exclusion_pattern, "probe")
            except LexiconError as exc:
                raise ValueError(f"bad exclusion_pattern: {exc}") from None


def _matches_exclusion(record: MetadataRecord, pattern: str) -> bool:
    for text in (record.title, record.abstract, *record.keywords):
        if text and any(pattern_matches(pattern, tok) for tok in tokenize(text)):
            return True
    return False


def record_passes(
    record: MetadataRecord,
    criteria: SelectionCriteria,
    detector: LanguageDetector | None = None,
) -> bool:
    """True iff every criterion holds for this record."""
    if record.doctype not in criteria.doctypes:
        return False
    if not _ddc_rule_holds(record, criteria.ddc_rule):
        return False
    if criteria.min_year is not None:
        if record.year is None:
            return False
        if criteria.min_year_inclusive:
            if record.year < criteria.min_year:
                return False
        elif record.year <= criteria.min_year:
            return False
    if criteria.require_abstract:
        if not has_valid_abstract(record, criteria.min_abstract_words):
            return False
        guess = detect_language(record.abstract or "", detector)
        if guess is None or guess.code not in criteria.languages:
            return False
    elif record.language is not None and record.language not in criteria.languages:
        return False
    if criteria.journal_allowlist is not None and record.source not in criteria.journal_allowlist:
        return False
    if criteria.exclusion_pattern is not None and _matches_exclusion(
        record, criteria.exclusion_pattern
    ):
        return False
    return True


def select(
    records: Iterable[MetadataRecord],
    criteria: SelectionCriteria,
    detector: LanguageDetector | None = None,
) -> Iterator[LabeledRecord]:
    """Yield (record, class_target) for every record passing all criteria."""
    for record in records:
        if record_passes(record, criteria, detector):
            yield record, criteria.class_target


@dataclass(frozen=True)
class CorpusSplit:
    """Stratified train/test/validation partition of a labeled corpus."""

    train: tuple[LabeledRecord, ...]
    test: tuple[LabeledRecord, ...]
    validation: tuple[LabeledRecord, ...]
    seed: int

    def __post_init__(self) -> None:
        ids = [r.id for r, _ in (*self.train, *self.test, *self.validation)]
        if len(ids) != len(set(ids)):
            raise ValueError("split parts must be disjoint by record id")


def _part_sizes(n: int) -> tuple[int, int, int]:
    # floor(0.6n)/floor(0.2n)/floor(0.2n), remainder handed out train-first
    sizes = [(6 * n) // 10, n // 5, n // 5]
    for i in range(n - sum(sizes)):
        sizes[i] += 1
    return sizes[0], sizes[1], sizes[2]


def split(records: list[LabeledRecord], seed: int) -> CorpusSplit:
    """Partition 60/20/20 per label, deterministically for a given seed.

    Each label's records are shuffled with an independent seed-derived RNG,
    so adding records of one label never reorders another's.
    """
    if not records:
        raise ValueError("cannot split an empty corpus")
    ids = [record.id for record, _ in records]
    if len(ids) != len(set(ids)):
        raise ValueError("duplicate record ids in corpus")

    by_label: dict[str, list[LabeledRecord]] = {}
    for item in records:
        by_label.setdefault(item[1], []).append(item)

    train: list[LabeledRecord] = []
    test: list[LabeledRecord] = []
    validation: list[LabeledRecord] = []
    for label in sorted(by_label):
        group = by_label[label]
        random.Random(f"{seed}:{label}").shuffle(group)
        n_train, n_test, _ = _part_sizes(len(group))
        train.extend(group[:n_train])
        test.extend(group[n_train : n_train + n_test])
        validation.extend(group[n_train + n_test :])
    return CorpusSplit(
        train=tuple(train), test=tuple(test), validation=tuple(validation), seed=seed
    )


def labeled_to_dict(item: LabeledRecord) -> dict:
    """Wire form: the record's fields plus a "label" key."""
    record, label = item
    payload = record_to_dict(record)
    payload["label"] = label
    return payload


def labeled_from_dict(payload: dict) -> LabeledRecord:
    label = payload.get("label")
    if label not in LABELS:
        raise ValueError(f"missing or unknown label: {label!r}")
    fields = {k: v for k, v in payload.items() if k != "label"}
    return record_from_dict(fields), label

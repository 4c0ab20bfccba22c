"""The hard filter: weighted wildcard keyword scoring against record fields.

Scores are integer milli-units (1000 == 1.0) so that threshold comparisons
like 0.6 + 0.4 >= 1 stay exact. A pattern may carry a single leading and/or
trailing ``*``; matching is per-token, never across token boundaries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from enum import Enum
from functools import lru_cache
from typing import IO, Iterable

from .records import MetadataRecord, tokenize

MILLI = 1000

_HEADER = ("keyword", "score")


class FieldMode(Enum):
    """Which record fields feed the scoring token universe."""

    TITLE_KEYWORDS = "title-keywords"
    TITLE_ABSTRACT_KEYWORDS = "title-abstract-keywords"


class LexiconError(ValueError):
    """A lexicon entry or file violates the format contract."""


# Match kinds, from the wildcard positions on the pattern.
_EXACT = 0
_PREFIX = 1  # trailing "*": token starts with stem
_SUFFIX = 2  # leading "*": token ends with stem
_CONTAINS = 3  # both: stem occurs inside token


def _parse_pattern(pattern: str) -> tuple[int, str]:
    suffix = pattern.startswith("*")
    prefix = pattern.endswith("*") and len(pattern) > 1
    stem = pattern[1 if suffix else 0 : len(pattern) - 1 if prefix else len(pattern)]
    if not stem:
        raise LexiconError(f"pattern {pattern!r} has an empty stem")
    if "*" in stem:
        raise LexiconError(f"pattern {pattern!r} has a wildcard away from the edges")
    if any(c.isspace() for c in stem):
        raise LexiconError(f"pattern {pattern!r} contains whitespace")
    if suffix and prefix:
        return _CONTAINS, stem
    if suffix:
        return _SUFFIX, stem
    if prefix:
        return _PREFIX, stem
    return _EXACT, stem


@dataclass(frozen=True)
class LexiconEntry:
    """One weighted keyword pattern."""

    pattern: str
    score_milli: int

    def __post_init__(self) -> None:
        _parse_pattern(self.pattern)
        if not 0 < self.score_milli <= MILLI:
            raise LexiconError(
                f"score for {self.pattern!r} must be in (0, {MILLI}], got {self.score_milli}"
            )


@lru_cache(maxsize=4096)
def _cached_parse(pattern: str) -> tuple[int, str]:
    return _parse_pattern(pattern)


def pattern_matches(pattern: str, token: str) -> bool:
    """Does a wildcard keyword pattern match one normalized token?

    No wildcard means exact equality; ``*stem`` matches a token suffix,
    ``stem*`` a token prefix, ``*stem*`` any occurrence inside the token.
    """
    kind, stem = _cached_parse(pattern)
    if kind == _EXACT:
        return token == stem
    if kind == _PREFIX:
        return token.startswith(stem)
    if kind == _SUFFIX:
        return token.endswith(stem)
    return stem in token


@dataclass(frozen=True)
class KeywordMatch:
    pattern: str
    score_milli: int
    token: str


@dataclass(frozen=True)
class ScoreBreakdown:
    """Sum of matched entry scores, each distinct pattern counted once."""

    total_milli: int
    matches: tuple[KeywordMatch, ...]


@dataclass(frozen=True)
class HardDecision:
    relevant: bool
    breakdown: ScoreBreakdown
    mode: FieldMode


class _Trie:
    """Character trie mapping stems to entry indexes."""

    __slots__ = ("children", "entry")

    def __init__(self) -> None:
        self.children: dict[str, _Trie] = {}
        self.entry: int | None = None

    def insert(self, stem: str, idx: int) -> None:
        node = self
        for ch in stem:
            node = node.children.setdefault(ch, _Trie())
        node.entry = idx


@dataclass(frozen=True)
class Lexicon:
    """An immutable weighted keyword list with a relevance threshold."""

    entries: tuple[LexiconEntry, ...]
    threshold_milli: int = MILLI

    # Matcher index, derived once at construction.
    _exact: dict = field(init=False, repr=False, compare=False)
    _prefix: _Trie = field(init=False, repr=False, compare=False)
    _suffix: _Trie = field(init=False, repr=False, compare=False)
    _contains: tuple = field(init=False, repr=False, compare=False)
    _contains_re: "re.Pattern | None" = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        exact: dict[str, int] = {}
        prefix = _Trie()
        suffix = _Trie()
        contains: list[tuple[str, int]] = []
        for idx, entry in enumerate(self.entries):
            if entry.pattern in seen:
                raise LexiconError(f"duplicate pattern {entry.pattern!r}")
            seen.add(entry.pattern)
            kind, stem = _parse_pattern(entry.pattern)
            if kind == _EXACT:
                exact[stem] = idx
            elif kind == _PREFIX:
                prefix.insert(stem, idx)
            elif kind == _SUFFIX:
                suffix.insert(stem[::-1], idx)
            else:
                contains.append((stem, idx))
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_prefix", prefix)
        object.__setattr__(self, "_suffix", suffix)
        object.__setattr__(self, "_contains", tuple(contains))
        # One any-stem prefilter scan replaces the per-entry loop for the
        # common no-match token.
        object.__setattr__(
            self,
            "_contains_re",
            re.compile("|".join(re.escape(s) for s, _ in contains)) if contains else None,
        )

    def match_token(self, token: str, hits: dict[int, str]) -> None:
        """Record entry indexes matching ``token`` into ``hits`` (first token wins)."""
        idx = self._exact.get(token)
        if idx is not None and idx not in hits:
            hits[idx] = token
        node = self._prefix
        for ch in token:
            node = node.children.get(ch)
            if node is None:
                break
            if node.entry is not None and node.entry not in hits:
                hits[node.entry] = token
        node = self._suffix
        for ch in reversed(token):
            node = node.children.get(ch)
            if node is None:
                break
            if node.entry is not None and node.entry not in hits:
                hits[node.entry] = token
        if self._contains_re is not None and self._contains_re.search(token):
            for stem, idx in self._contains:
                if idx not in hits and stem in token:
                    hits[idx] = token


def record_tokens(record: MetadataRecord, mode: FieldMode) -> tuple[str, ...]:
    """Token universe for scoring: title (+ abstract) + keywords, in order."""
    tokens: list[str] = []
    if record.title:
        tokens.extend(tokenize(record.title))
    if mode is FieldMode.TITLE_ABSTRACT_KEYWORDS and record.abstract:
        tokens.extend(tokenize(record.abstract))
    for keyword in record.keywords:
        tokens.extend(tokenize(keyword))
    return tuple(tokens)


def score_record(
    lexicon: Lexicon, record: MetadataRecord, mode: FieldMode
) -> ScoreBreakdown:
    """Sum the scores of all lexicon entries matching the record.

    Each entry contributes its score at most once, against the first token
    (in field order) it matches. Absent fields contribute no tokens.
    """
    hits: dict[int, str] = {}
    seen_tokens: set[str] = set()
    match_token = lexicon.match_token
    for token in record_tokens(record, mode):
        if token in seen_tokens:
            continue
        seen_tokens.add(token)
        match_token(token, hits)
    if not hits:
        return ScoreBreakdown(total_milli=0, matches=())
    entries = lexicon.entries
    matches = tuple(
        KeywordMatch(entries[i].pattern, entries[i].score_milli, hits[i])
        for i in sorted(hits)
    )
    return ScoreBreakdown(
        total_milli=sum(m.score_milli for m in matches), matches=matches
    )


def classify_hard(
    lexicon: Lexicon, record: MetadataRecord, mode: FieldMode
) -> HardDecision:
    """Apply the relevance threshold to the record's keyword score."""
    breakdown = score_record(lexicon, record, mode)
    return HardDecision(
        relevant=breakdown.total_milli >= lexicon.threshold_milli,
        breakdown=breakdown,
        mode=mode,
    )


def _score_to_milli(text: str, line_no: int) -> int:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise LexiconError(f"line {line_no}: unparseable score {text!r}") from None
    if not value.is_finite() or not 0 < value <= 1:
        raise LexiconError(f"line {line_no}: score {text!r} outside (0, 1]")
    quantized = value.quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)
    milli = int(quantized.scaleb(3))
    if milli == 0:
        raise LexiconError(f"line {line_no}: score {text!r} rounds to zero")
    return milli


def load_lexicon(
    source: str | IO[str] | Iterable[str], threshold_milli: int = MILLI
) -> Lexicon:
    """Load a tab-separated ``pattern<TAB>score`` lexicon.

    Scores are decimals in (0, 1], converted to milli-units with
    round-half-away-from-zero at three decimals. Comment lines start with
    ``#``; an optional ``keyword<TAB>score`` header is skipped. Errors name
    the offending line.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    entries: list[LexiconEntry] = []
    seen: dict[str, int] = {}
    first_data_line = True
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if first_data_line and tuple(p.lower() for p in parts) == _HEADER:
            first_data_line = False
            continue
        first_data_line = False
        if len(parts) != 2 or not parts[0]:
            raise LexiconError(f"line {line_no}: expected 'pattern<TAB>score', got {line!r}")
        pattern, score_text = parts
        if pattern in seen:
            raise LexiconError(
                f"line {line_no}: duplicate pattern {pattern!r} (first at line {seen[pattern]})"
            )
        seen[pattern] = line_no
        try:
            entry = LexiconEntry(pattern=pattern, score_milli=_score_to_milli(score_text, line_no))
        except LexiconError as exc:
            if str(exc).startswith("line "):
                raise
            raise LexiconError(f"line {line_no}: {exc}") from None
        entries.append(entry)
    return Lexicon(entries=tuple(entries), threshold_milli=threshold_milli)

"""Core record model, text normalization, and record-level predicates.

Everything downstream (keyword scoring, language gating, corpus selection)
operates on the token universe defined by :func:`normalize`.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_WORD_RE = re.compile(r"\w+")
_LANG_RE = re.compile(r"[a-z]{2}")
_DDC_RE = re.compile(r"(\d+)(?:\.\d*)?")

POLITICS_DDC_LOW = 320
POLITICS_DDC_HIGH = 328

YEAR_MIN = 1400
YEAR_MAX = 2100


@dataclass(frozen=True)
class NormalizedText:
    """Ordered lowercase word tokens plus the text they were derived from."""

    tokens: tuple[str, ...]
    raw: str

    def reconstruct(self) -> str:
        return " ".join(self.tokens)


def normalize(text: str) -> NormalizedText:
    """Lowercase ``text``, apply Unicode NFC, and split on word boundaries.

    Punctuation-only fragments are dropped and token order follows the
    input. Idempotent: normalizing the reconstruction of the tokens yields
    the same token sequence.
    """
    folded = unicodedata.normalize("NFC", text).lower()
    return NormalizedText(tokens=tuple(_WORD_RE.findall(folded)), raw=text)


def tokenize(text: str) -> tuple[str, ...]:
    """Shorthand for ``normalize(text).tokens``."""
    return normalize(text).tokens


@dataclass(frozen=True)
class MetadataRecord:
    """One scholarly item as harvested from a metadata provider.

    Optional fields stay ``None`` when the provider did not supply them;
    ``keywords`` and ``ddc`` are possibly-empty tuples.
    """

    id: str
    title: str | None = None
    abstract: str | None = None
    keywords: tuple[str, ...] = ()
    language: str | None = None
    ddc: tuple[str, ...] = ()
    doctype: str | None = None
    source: str | None = None
    year: int | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("record id must be non-empty")
        # Tolerate list inputs (e.g. straight from JSON) but store tuples.
        if not isinstance(self.keywords, tuple):
            object.__setattr__(self, "keywords", tuple(self.keywords))
        if not isinstance(self.ddc, tuple):
            object.__setattr__(self, "ddc", tuple(self.ddc))
        if self.language is not None and not _LANG_RE.fullmatch(self.language):
            raise ValueError(
                f"language must be a lowercase two-letter code, got {self.language!r}"
            )
        if self.year is not None and not YEAR_MIN <= self.year <= YEAR_MAX:
            raise ValueError(f"year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]")


def parse_ddc_code(code: str) -> int | None:
    """Integer part of a DDC code string, or ``None`` when unparseable.

    Accepts plain codes ("321") and decimal-qualified ones ("328.3");
    anything else (empty, prefixed, alphabetic) is treated as noise.
    """
    match = _DDC_RE.fullmatch(code.strip())
    return int(match.group(1)) if match else None


def ddc_in_politics_range(record: MetadataRecord) -> bool:
    """True iff any DDC code has integer part in the 320-328 range."""
    for code in record.ddc:
        num = parse_ddc_code(code)
        if num is not None and POLITICS_DDC_LOW <= num <= POLITICS_DDC_HIGH:
            return True
    return False


def has_valid_abstract(record: MetadataRecord, min_words: int = 20) -> bool:
    """True iff the abstract exists and holds at least ``min_words`` tokens."""
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    if not record.abstract:
        return False
    return len(tokenize(record.abstract)) >= min_words

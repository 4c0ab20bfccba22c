"""Parsers turning record files into MetadataRecord streams.

Two input shapes are supported: UTF-8 line-delimited JSON (one record
object per line, fields as on MetadataRecord) and XML with Dublin-Core
children under repeated ``record`` elements. Harvested metadata is dirty,
so a bad record is counted and skipped, never aborts the stream; only an
unreadable stream or broken XML is fatal.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .records import MetadataRecord, YEAR_MAX, YEAR_MIN

REASON_MALFORMED = "malformed-record"
REASON_MISSING_ID = "missing-id"
REASON_DUPLICATE_ID = "duplicate-id"

# dc:subject values that are pure DDC notation go to ddc, the rest are keywords
_DDC_SUBJECT_RE = re.compile(r"\d{3}(\.\d+)?")
_YEAR_RE = re.compile(r"\d{4}")

# ISO 639-2 fallbacks for the languages the pipeline actually gates on.
_LANG_ALIASES = {"eng": "en", "deu": "de", "ger": "de", "fra": "fr", "fre": "fr"}


class IngestError(Exception):
    """Fatal input failure: unreadable stream or malformed XML."""


@dataclass
class IngestReport:
    """Tally of one ingestion run; final once the stream is exhausted."""

    read: int = 0
    accepted: int = 0
    rejected: int = 0
    reject_reasons: Counter = field(default_factory=Counter)

    def reject(self, reason: str) -> None:
        self.read += 1
        self.rejected += 1
        self.reject_reasons[reason] += 1

    def accept(self) -> None:
        self.read += 1
        self.accepted += 1

    def as_dict(self) -> dict:
        return {
            "read": self.read,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reject_reasons": dict(self.reject_reasons),
        }


def _clean_language(value: object) -> str | None:
    if not isinstance(value, str):
        return None
    lang = value.strip().lower()
    lang = _LANG_ALIASES.get(lang, lang)
    return lang if re.fullmatch(r"[a-z]{2}", lang) else None


def _clean_year(value: object) -> int | None:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        return None
    try:
        year = int(value)
    except ValueError:
        return None
    return year if YEAR_MIN <= year <= YEAR_MAX else None


def _text_field(obj: dict, key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"field {key!r} must be a string")
    return value or None


def _text_list(obj: dict, key: str) -> tuple[str, ...]:
    value = obj.get(key)
    if value is None:
        return ()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"field {key!r} must be a list of strings")
    return tuple(v for v in value if v)


def record_from_dict(obj: dict) -> MetadataRecord:
    """Build a record from a parsed JSON object.

    Structural problems (wrong types, missing id) raise ValueError; dirty
    optional values (odd language codes, out-of-range years) are dropped
    rather than rejected.
    """
    raw_id = obj.get("id")
    if isinstance(raw_id, int) and not isinstance(raw_id, bool):
        raw_id = str(raw_id)
    if not isinstance(raw_id, str) or not raw_id:
        raise ValueError(REASON_MISSING_ID)
    return MetadataRecord(
        id=raw_id,
        title=_text_field(obj, "title"),
        abstract=_text_field(obj, "abstract"),
        keywords=_text_list(obj, "keywords"),
        language=_clean_language(obj.get("language")),
        ddc=_text_list(obj, "ddc"),
        doctype=_text_field(obj, "doctype"),
        source=_text_field(obj, "source"),
        year=_clean_year(obj.get("year")),
    )


def record_to_dict(record: MetadataRecord) -> dict:
    """Inverse of record_from_dict; absent fields are omitted."""
    out: dict = {"id": record.id}
    for key in ("title", "abstract", "language", "doctype", "source", "year"):
        value = getattr(record, key)
        if value is not None:
            out[key] = value
    if record.keywords:
        out["keywords"] = list(record.keywords)
    if record.ddc:
        out["ddc"] = list(record.ddc)
    return out


def parse_records_jsonl(
    stream: IO[str] | IO[bytes] | Iterable[str],
) -> tuple[Iterator[MetadataRecord], IngestReport]:
    """Parse line-delimited JSON records.

    Returns a lazy record iterator plus the report it fills while being
    consumed. Blank lines are ignored; each malformed line is counted
    under a reject reason and processing continues.
    """
    report = IngestReport()

    def records() -> Iterator[MetadataRecord]:
        seen_ids: set[str] = set()
        for raw_line in stream:
            line = raw_line.decode("utf-8") if isinstance(raw_line, bytes) else raw_line
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                report.reject(REASON_MALFORMED)
                continue
            if not isinstance(obj, dict):
                report.reject(REASON_MALFORMED)
                continue
            try:
                record = record_from_dict(obj)
            except ValueError as exc:
                reason = str(exc)
                report.reject(reason if reason == REASON_MISSING_ID else REASON_MALFORMED)
                continue
            if record.id in seen_ids:
                report.reject(REASON_DUPLICATE_ID)
                continue
            seen_ids.add(record.id)
            report.accept()
            yield record

    return records(), report


def _local_name(tag: object) -> str:
    return tag.rpartition("}")[2] if isinstance(tag, str) else ""


def _record_from_element(elem: ET.Element) -> MetadataRecord:
    texts: dict[str, list[str]] = {}
    for child in elem.iter():
        name = _local_name(child.tag)
        value = (child.text or "").strip()
        if value:
            texts.setdefault(name, []).append(value)

    identifiers = texts.get("identifier", [])
    if not identifiers:
        raise ValueError(REASON_MISSING_ID)

    keywords: list[str] = []
    ddc: list[str] = []
    for subject in texts.get("subject", []):
        if _DDC_SUBJECT_RE.fullmatch(subject):
            ddc.append(subject)
        else:
            keywords.append(subject)

    year = None
    for date in texts.get("date", []):
        match = _YEAR_RE.search(date)
        if match:
            year = _clean_year(match.group(0))
            if year is not None:
                break

    def first(name: str) -> str | None:
        values = texts.get(name)
        return values[0] if values else None

    return MetadataRecord(
        id=identifiers[0],
        title=first("title"),
        abstract=first("description"),
        keywords=tuple(keywords),
        language=_clean_language(first("language")),
        ddc=tuple(ddc),
        doctype=first("type"),
        source=first("source"),
        year=year,
    )


def parse_records_dc_xml(
    stream: IO[bytes],
) -> tuple[Iterator[MetadataRecord], IngestReport]:
    """Parse Dublin-Core-style XML: repeated ``record`` elements.

    Element matching is namespace-agnostic (local names only), which copes
    with both bare DC and OAI-PMH-wrapped exports. Malformed XML raises
    IngestError with the parser position.
    """
    report = IngestReport()

    def records() -> Iterator[MetadataRecord]:
        seen_ids: set[str] = set()
        try:
            for _event, elem in ET.iterparse(stream, events=("end",)):
                if _local_name(elem.tag) != "record":
                    continue
                try:
                    record = _record_from_element(elem)
                except ValueError as exc:
                    reason = str(exc)
                    report.reject(reason if reason == REASON_MISSING_ID else REASON_MALFORMED)
                    continue
                finally:
                    elem.clear()
                if record.id in seen_ids:
                    report.reject(REASON_DUPLICATE_ID)
                    continue
                seen_ids.add(record.id)
                report.accept()
                yield record
        except ET.ParseError as exc:
            line, column = exc.position
            raise IngestError(f"malformed XML at line {line}, column {column}: {exc.msg}") from exc

    return records(), report

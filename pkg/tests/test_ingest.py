"""JSONL and Dublin Core XML ingestion."""

import io
import json

import pytest

from polifilter.ingest import (
    IngestError,
    REASON_DUPLICATE_ID,
    REASON_MALFORMED,
    REASON_MISSING_ID,
    parse_records_dc_xml,
    parse_records_jsonl,
    record_from_dict,
    record_to_dict,
)
from polifilter.records import MetadataRecord


def drain(source):
    records, report = parse_records_jsonl(source)
    return list(records), report


class TestJsonl:
    def test_happy_path(self):
        lines = [
            '{"id": "a", "title": "T1", "doctype": "article"}',
            '{"id": "b", "title": "T2", "year": 2020, "keywords": ["k"]}',
        ]
        records, report = drain(lines)
        assert [r.id for r in records] == ["a", "b"]
        assert records[1].year == 2020 and records[1].keywords == ("k",)
        assert report.read == 2 and report.accepted == 2 and report.rejected == 0

    def test_blank_lines_not_counted(self):
        records, report = drain(['', '  ', '{"id": "a"}', ''])
        assert len(records) == 1
        assert report.read == 1

    def test_malformed_json_skipped_and_counted(self):
        records, report = drain(['not json', '{"id": "a"}', '[1,2]'])
        assert [r.id for r in records] == ["a"]
        assert report.reject_reasons[REASON_MALFORMED] == 2

    def test_missing_id_reason(self):
        _, report = drain(['{"title": "no id"}', '{"id": ""}'])
        assert report.reject_reasons[REASON_MISSING_ID] == 2

    def test_duplicate_ids_rejected(self):
        records, report = drain(['{"id": "a"}', '{"id": "a", "title": "again"}'])
        assert len(records) == 1
        assert report.reject_reasons[REASON_DUPLICATE_ID] == 1

    def test_integer_id_coerced(self):
        records, _ = drain(['{"id": 42}'])
        assert records[0].id == "42"

    def test_dirty_optional_values_dropped_not_rejected(self):
        records, report = drain(
            ['{"id": "a", "language": "English", "year": "not a year"}']
        )
        assert report.accepted == 1
        rec = records[0]
        assert rec.language is None and rec.year is None

    def test_wrong_field_type_is_structural(self):
        # values can be dirty, types cannot: a numeric title rejects the record
        _, report = drain(['{"id": "a", "title": 7}'])
        assert report.reject_reasons[REASON_MALFORMED] == 1

    @pytest.mark.parametrize("raw,expected", [
        ("eng", "en"), ("ger", "de"), ("deu", "de"), ("fre", "fr"), ("FR", "fr"),
    ])
    def test_language_aliases(self, raw, expected):
        records, _ = drain([json.dumps({"id": "a", "language": raw})])
        assert records[0].language == expected

    def test_year_string_coerced(self):
        records, _ = drain(['{"id": "a", "year": "2019"}'])
        assert records[0].year == 2019

    def test_accepts_byte_stream(self):
        stream = io.BytesIO(b'{"id": "a", "title": "T"}\n')
        records, report = parse_records_jsonl(stream)
        assert next(records).id == "a"

    def test_report_is_lazy(self):
        records, report = parse_records_jsonl(['{"id": "a"}'])
        assert report.read == 0  # nothing consumed yet
        list(records)
        assert report.read == 1


class TestRecordDictRoundtrip:
    def test_roundtrip(self):
        rec = MetadataRecord(
            id="a", title="T", abstract="A", keywords=("k1", "k2"),
            language="de", ddc=("320", "004"), doctype="article",
            source="Journal", year=2021,
        )
        assert record_from_dict(record_to_dict(rec)) == rec

    def test_to_dict_omits_absent(self):
        assert record_to_dict(MetadataRecord(id="a")) == {"id": "a"}

    def test_from_dict_requires_id(self):
        with pytest.raises(ValueError):
            record_from_dict({"title": "T"})


OAI_XML = """<?xml version="1.0" encoding="UTF-8"?>
<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/">
  <ListRecords>
    <record>
      <metadata>
        <oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/"
                   xmlns:dc="http://purl.org/dc/elements/1.1/">
          <dc:identifier>oai:example:1</dc:identifier>
          <dc:title>Wahlsysteme im Vergleich</dc:title>
          <dc:description>Eine vergleichende Studie der Wahlsysteme.</dc:description>
          <dc:subject>320.9</dc:subject>
          <dc:subject>Wahlen</dc:subject>
          <dc:language>ger</dc:language>
          <dc:type>article</dc:type>
          <dc:source>Zeitschrift für Politik</dc:source>
          <dc:date>2019-04-01</dc:date>
        </oai_dc:dc>
      </metadata>
    </record>
    <record>
      <metadata>
        <oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/"
                   xmlns:dc="http://purl.org/dc/elements/1.1/">
          <dc:identifier>oai:example:2</dc:identifier>
          <dc:title>Second</dc:title>
        </oai_dc:dc>
      </metadata>
    </record>
  </ListRecords>
</OAI-PMH>
"""


class TestDcXml:
    def test_parses_records(self):
        records, report = parse_records_dc_xml(io.StringIO(OAI_XML))
        records = list(records)
        assert [r.id for r in records] == ["oai:example:1", "oai:example:2"]
        first = records[0]
        assert first.title == "Wahlsysteme im Vergleich"
        assert first.ddc == ("320.9",)
        assert first.keywords == ("Wahlen",)
        assert first.language == "de"
        assert first.year == 2019
        assert first.source == "Zeitschrift für Politik"
        assert report.accepted == 2

    def test_subject_routing_needs_numeric_shape(self):
        xml = OAI_XML.replace("<dc:subject>320.9</dc:subject>",
                              "<dc:subject>320 politics</dc:subject>")
        records, _ = parse_records_dc_xml(io.StringIO(xml))
        first = list(records)[0]
        assert first.ddc == ()
        assert "320 politics" in first.keywords

    def test_malformed_xml_raises_with_position(self):
        breaks = OAI_XML.replace("</OAI-PMH>", "")
        records, _ = parse_records_dc_xml(io.StringIO(breaks))
        with pytest.raises(IngestError, match=r"line \d+, column \d+"):
            list(records)

    def test_record_without_identifier_rejected(self):
        xml = OAI_XML.replace("<dc:identifier>oai:example:2</dc:identifier>", "")
        records, report = parse_records_dc_xml(io.StringIO(xml))
        assert len(list(records)) == 1
        assert report.reject_reasons[REASON_MISSING_ID] == 1

"""Wildcard patterns, milli-scoring, lexicon loading, and the matcher index."""

import pytest
from hypothesis import given, settings, strategies as st

from polifilter.lexicon import (
    FieldMode,
    Lexicon,
    LexiconEntry,
    LexiconError,
    MILLI,
    classify_hard,
    load_lexicon,
    pattern_matches,
    record_tokens,
    score_record,
)
from polifilter.records import MetadataRecord



class TestPatternMatches:
    @pytest.mark.parametrize("pattern,token,expected", [
        ("policy", "policy", True),
        ("policy", "policies", False),
        ("politi*", "politics", True),
        ("politi*", "politique", True),
        ("politi*", "politi", True),
        ("politi*", "polit", False),
        ("politi*", "geopolitics", False),
        ("*politik", "außenpolitik", True),
        ("*politik", "politik", True),
        ("*politik", "politiker", False),
        ("*krieg*", "kriegsende", True),
        ("*krieg*", "bürgerkriegs", True),
        ("*krieg*", "krieg", True),
        ("*krieg*", "kreig", False),
    ])
    def test_semantics(self, pattern, token, expected):
        assert pattern_matches(pattern, token) is expected

    @pytest.mark.parametrize("bad", ["*", "**", "", "a*b", "po li*", "*a*b*"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(LexiconError):
            pattern_matches(bad, "token")

    def test_matching_is_whole_token_only(self):
        # no cross-token matching: pattern applies to a single token
        assert not pattern_matches("foreign", "foreign_policy".replace("_", " "))


class TestEntry:
    def test_score_bounds(self):
        LexiconEntry("a", 1)
        LexiconEntry("a", MILLI)
        with pytest.raises(ValueError):
            LexiconEntry("a", 0)
        with pytest.raises(ValueError):
            LexiconEntry("a", MILLI + 1)


class TestLoadLexicon:
    def test_table1_shape(self, table1_lexicon):
        got = {e.pattern: e.score_milli for e in table1_lexicon.entries}
        assert got == {"politi*": 1000, "*politik": 1000, "bürgerkrieg": 600, "policy": 400}
        assert table1_lexicon.threshold_milli == MILLI

    def test_header_is_optional(self):
        with_header = load_lexicon("keyword\tscore\npolicy\t0.4\n")
        without = load_lexicon("policy\t0.4\n")
        assert with_header.entries == without.entries

    def test_blank_lines_and_comments_skipped(self):
        lex = load_lexicon("\n# comment\npolicy\t0.4\n\n")
        assert len(lex.entries) == 1

    @pytest.mark.parametrize("score,milli", [
        ("1", 1000), ("1.0", 1000), ("0.4", 400), ("0.6", 600),
        ("0.0005", 1), ("0.35", 350), (".2", 200),
    ])
    def test_score_parsing_half_up(self, score, milli):
        lex = load_lexicon(f"kw\t{score}\n")
        assert lex.entries[0].score_milli == milli

    @pytest.mark.parametrize("score", ["0", "-0.2", "1.5", "abc", "nan", "inf", "0.0004"])
    def test_bad_scores_rejected_with_line(self, score):
        with pytest.raises(LexiconError, match="line 2"):
            load_lexicon(f"ok\t0.5\n{'x'}\t{score}\n")

    def test_duplicate_names_both_lines(self):
        text = "politi*\t1\nfoo\t0.5\nbar\t0.2\npoliti*\t0.3\n"
        with pytest.raises(LexiconError, match=r"line 4.*line 1"):
            load_lexicon(text)

    def test_missing_score_column(self):
        with pytest.raises(LexiconError, match="line 1"):
            load_lexicon("loneword\n")

    def test_accepts_iterable_of_lines(self):
        lex = load_lexicon(["keyword\tscore", "policy\t0.4"])
        assert lex.entries[0].pattern == "policy"

    def test_custom_threshold(self):
        lex = load_lexicon("policy\t0.4\n", threshold_milli=400)
        rec = MetadataRecord(id="a", title="policy")
        assert classify_hard(lex, rec, FieldMode.TITLE_KEYWORDS).relevant


class TestScoreRecord:
    def test_entry_scores_at_most_once(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="policy policy policy")
        got = score_record(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        assert got.total_milli == 400
        assert len(got.matches) == 1

    def test_first_matching_token_wins_in_field_order(self, table1_lexicon):
        rec = MetadataRecord(
            id="a", title="about policy", abstract="policy again", keywords=("policy",),
        )
        got = score_record(table1_lexicon, rec, FieldMode.TITLE_ABSTRACT_KEYWORDS)
        assert [m.token for m in got.matches] == ["policy"]

    def test_mode_controls_abstract_visibility(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="nothing here", abstract="bürgerkrieg policy")
        no_abstract = score_record(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        with_abstract = score_record(table1_lexicon, rec, FieldMode.TITLE_ABSTRACT_KEYWORDS)
        assert no_abstract.total_milli == 0
        assert with_abstract.total_milli == 1000

    def test_keywords_count_in_both_modes(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="nothing", keywords=("Bürgerkrieg",))
        got = score_record(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        assert got.total_milli == 600

    def test_absent_fields_contribute_nothing(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="x")
        assert score_record(table1_lexicon, rec, FieldMode.TITLE_ABSTRACT_KEYWORDS).total_milli == 0

    def test_multiple_entries_sum(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="Bürgerkrieg and policy")
        got = score_record(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        assert got.total_milli == 1000
        assert {m.pattern for m in got.matches} == {"bürgerkrieg", "policy"}


class TestClassifyHard:
    def test_threshold_is_inclusive(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="bürgerkrieg policy")
        decision = classify_hard(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        assert decision.relevant and decision.breakdown.total_milli == 1000

    def test_below_threshold(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="policy")
        assert not classify_hard(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS).relevant

    def test_wildcard_hit_clears_threshold(self, table1_lexicon):
        rec = MetadataRecord(id="a", title="Die Außenpolitik Deutschlands")
        decision = classify_hard(table1_lexicon, rec, FieldMode.TITLE_KEYWORDS)
        assert decision.relevant
        assert decision.breakdown.matches[0].pattern == "*politik"


class TestLexiconIndex:
    def test_duplicate_pattern_rejected_at_construction(self):
        with pytest.raises(LexiconError):
            Lexicon((LexiconEntry("a", 100), LexiconEntry("a", 200)))

    def test_match_token_covers_all_kinds(self):
        lex = Lexicon((
            LexiconEntry("exact", 100),
            LexiconEntry("pre*", 200),
            LexiconEntry("*suf", 300),
            LexiconEntry("*mid*", 400),
        ))
        hits: dict[int, str] = {}
        for token in ("exact", "prefix", "bysuf", "amidst"):
            lex.match_token(token, hits)
        assert hits == {0: "exact", 1: "prefix", 2: "bysuf", 3: "amidst"}


# Independent oracle: entry-by-entry, token-by-token double loop.
def naive_score(lexicon, record, mode):
    ordered, seen = [], set()
    for token in record_tokens(record, mode):
        if token not in seen:
            seen.add(token)
            ordered.append(token)
    total, matches = 0, []
    for entry in lexicon.entries:
        for token in ordered:
            if pattern_matches(entry.pattern, token):
                total += entry.score_milli
                matches.append((entry.pattern, entry.score_milli, token))
                break
    return total, sorted(matches)


_stem = st.text(alphabet="abö", min_size=1, max_size=4)
_pattern = _stem.flatmap(
    lambda s: st.sampled_from([s, s + "*", "*" + s, "*" + s + "*"])
)
_entries = st.dictionaries(_pattern, st.sampled_from([100, 200, 400, 600, 1000]),
                           min_size=1, max_size=8)
_word = st.text(alphabet="abö", min_size=1, max_size=5)
_text = st.lists(_word, min_size=0, max_size=6).map(" ".join)


@settings(max_examples=300, deadline=None)
@given(entries=_entries, title=_text, abstract=_text, keywords=st.lists(_word, max_size=3))
def test_score_record_matches_naive_oracle(entries, title, abstract, keywords):
    lexicon = Lexicon(tuple(LexiconEntry(p, s) for p, s in entries.items()))
    record = MetadataRecord(
        id="r", title=title or "x", abstract=abstract or None, keywords=tuple(keywords),
    )
    for mode in FieldMode:
        got = score_record(lexicon, record, mode)
        want_total, want_matches = naive_score(lexicon, record, mode)
        assert got.total_milli == want_total
        assert sorted((m.pattern, m.score_milli, m.token) for m in got.matches) == want_matches

"""Stage router: one terminal verdict per record, with a full audit trace.

Gates run in a fixed order: type/source allowlist, DDC auto-accept,
abstract validity, language, then the soft classifier. Records that cannot
reach the soft stage (no usable abstract, blocked language, transport
failure, or no backend configured) fall back to the hard keyword filter
over a configurable field set. Every stage a record touches lands in the
trace, so any verdict can be audited after the fact.

``route`` is pure given its injected components (lexicon, detector,
backend); ``route_batch`` may fan out over threads but always emits
decisions in input order and never lets one record abort the batch.
"""

from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .langdetect import (
    DEFAULT_MIN_CONFIDENCE,
    DEFAULT_PERMITTED,
    LanguageDetector,
    default_detector,
    is_permitted,
)
from .lexicon import FieldMode, Lexicon, ScoreBreakdown, classify_hard
from .records import MetadataRecord, ddc_in_politics_range, has_valid_abstract
from .softclf import Classification, ClassifierBackend, ClassifierInput, TransportError


class Verdict(Enum):
    POLITICS = "politics"
    MULTI = "multi"
    EXCLUDED = "excluded"


class Stage(Enum):
    """Trace stages. ABSTRACT never decides; ERROR only appears when
    route_batch isolates a per-record failure."""

    TYPE_SOURCE = "type_source"
    DDC = "ddc"
    ABSTRACT = "abstract"
    LANGUAGE = "language"
    HARD_FILTER = "hard_filter"
    SOFT_FILTER = "soft_filter"
    ERROR = "error"


class Fallback(Enum):
    """What to do with records the soft stage cannot judge."""

    EXCLUDE = "exclude"
    HARD_FILTER = "hard-filter"


@dataclass(frozen=True)
class PipelineConfig:
    """Routing parameters; everything the operator can turn.

    ``soft_backend`` is the selector string recorded in manifests
    ("baseline:<path>", "remote:<url>", or None for hard-only); the live
    backend object is injected separately so the config stays serializable.
    """

    allowed_doctypes: frozenset[str] = frozenset({"article", "review"})
    allowed_sources: frozenset[str] | None = None
    min_abstract_words: int = 20
    permitted_languages: frozenset[str] = DEFAULT_PERMITTED
    min_language_confidence: float = DEFAULT_MIN_CONFIDENCE
    hard_mode_no_abstract: FieldMode = FieldMode.TITLE_KEYWORDS
    language_fallback: Fallback = Fallback.HARD_FILTER
    soft_error_fallback: Fallback = Fallback.HARD_FILTER
    soft_backend: str | None = None

    def __post_init__(self) -> None:
        if not self.allowed_doctypes:
            raise ValueError("allowed_doctypes must be non-empty")
        if not self.permitted_languages:
            raise ValueError("permitted_languages must be non-empty")
        if self.min_abstract_words < 1:
            raise ValueError("min_abstract_words must be >= 1")
        for name in ("allowed_doctypes", "allowed_sources", "permitted_languages"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, frozenset):
                object.__setattr__(self, name, frozenset(value))


@dataclass(frozen=True)
class TraceEntry:
    stage: Stage
    outcome: str


@dataclass(frozen=True)
class PipelineDecision:
    """Terminal verdict plus the ordered stage trace that produced it."""

    record_id: str
    verdict: Verdict
    deciding_stage: Stage
    trace: tuple[TraceEntry, ...]
    evidence: ScoreBreakdown | Classification | None = None

    def __post_init__(self) -> None:
        if not self.trace:
            raise ValueError("trace must be non-empty")
        if self.trace[-1].stage is not self.deciding_stage:
            raise ValueError("last trace entry must match deciding_stage")


def _hard_verdict(
    record: MetadataRecord,
    mode: FieldMode,
    lexicon: Lexicon,
    trace: list[TraceEntry],
) -> PipelineDecision:
    decision = classify_hard(lexicon, record, mode)
    label = "relevant" if decision.relevant else "irrelevant"
    trace.append(TraceEntry(Stage.HARD_FILTER, f"{label}:{mode.value}"))
    return PipelineDecision(
        record_id=record.id,
        verdict=Verdict.POLITICS if decision.relevant else Verdict.MULTI,
        deciding_stage=Stage.HARD_FILTER,
        trace=tuple(trace),
        evidence=decision.breakdown,
    )


def route(
    record: MetadataRecord,
    config: PipelineConfig,
    lexicon: Lexicon,
    detector: LanguageDetector | None = None,
    soft_backend: ClassifierBackend | None = None,
) -> PipelineDecision:
    """Send one record through the stage gates and return its decision.

    Stage order: (1) doctype/source allowlist, mismatch excludes; (2) DDC
    320-328 auto-accepts, downstream stages never run; (3) records without
    a valid abstract go straight to the hard filter (no-abstract field
    mode); (4) impermissible or undetermined language either excludes or
    falls back to the hard filter over title+abstract+keywords, per
    config; (5) the soft backend decides politics/multi. A transport
    failure at stage 5 degrades per ``soft_error_fallback`` and is always
    visible in the trace. With no backend configured, stage 4 and 5 are
    replaced by one hard-filter pass over all fields.
    """
    trace: list[TraceEntry] = []

    if record.doctype not in config.allowed_doctypes:
        trace.append(TraceEntry(Stage.TYPE_SOURCE, "doctype-blocked"))
        return PipelineDecision(record.id, Verdict.EXCLUDED, Stage.TYPE_SOURCE, tuple(trace))
    if config.allowed_sources is not None and record.source not in config.allowed_sources:
        trace.append(TraceEntry(Stage.TYPE_SOURCE, "source-blocked"))
        return PipelineDecision(record.id, Verdict.EXCLUDED, Stage.TYPE_SOURCE, tuple(trace))
    trace.append(TraceEntry(Stage.TYPE_SOURCE, "pass"))

    if ddc_in_politics_range(record):
        trace.append(TraceEntry(Stage.DDC, "match"))
        return PipelineDecision(record.id, Verdict.POLITICS, Stage.DDC, tuple(trace))
    trace.append(TraceEntry(Stage.DDC, "no-match"))

    if not has_valid_abstract(record, config.min_abstract_words):
        trace.append(TraceEntry(Stage.ABSTRACT, "missing" if not record.abstract else "short"))
        return _hard_verdict(record, config.hard_mode_no_abstract, lexicon, trace)
    trace.append(TraceEntry(Stage.ABSTRACT, "valid"))

    if soft_backend is None:
        # Hard-only operation: no model to protect, so no language gate.
        return _hard_verdict(record, FieldMode.TITLE_ABSTRACT_KEYWORDS, lexicon, trace)

    guess = (detector or default_detector()).detect(record.abstract or "")
    if not is_permitted(guess, config.permitted_languages, config.min_language_confidence):
        blocked = f"blocked:{guess.code if guess else 'und'}"
        if config.language_fallback is Fallback.EXCLUDE:
            trace.append(TraceEntry(Stage.LANGUAGE, blocked))
            return PipelineDecision(record.id, Verdict.EXCLUDED, Stage.LANGUAGE, tuple(trace))
        trace.append(TraceEntry(Stage.LANGUAGE, blocked + ":fallback"))
        return _hard_verdict(record, FieldMode.TITLE_ABSTRACT_KEYWORDS, lexicon, trace)
    trace.append(TraceEntry(Stage.LANGUAGE, f"pass:{guess.code}"))

    try:
        result = soft_backend.classify(ClassifierInput.from_fields(record.title, record.abstract))
    except TransportError:
        if config.soft_error_fallback is Fallback.EXCLUDE:
            trace.append(TraceEntry(Stage.SOFT_FILTER, "transport-error"))
            return PipelineDecision(record.id, Verdict.EXCLUDED, Stage.SOFT_FILTER, tuple(trace))
        trace.append(TraceEntry(Stage.SOFT_FILTER, "transport-error:fallback"))
        return _hard_verdict(record, FieldMode.TITLE_ABSTRACT_KEYWORDS, lexicon, trace)
    trace.append(TraceEntry(Stage.SOFT_FILTER, result.label))
    verdict = Verdict.POLITICS if result.label == "politics" else Verdict.MULTI
    return PipelineDecision(record.id, verdict, Stage.SOFT_FILTER, tuple(trace), evidence=result)


def _safe_route(
    record: MetadataRecord,
    config: PipelineConfig,
    lexicon: Lexicon,
    detector: LanguageDetector | None,
    soft_backend: ClassifierBackend | None,
) -> PipelineDecision:
    try:
        return route(record, config, lexicon, detector, soft_backend)
    except Exception as exc:  # per-record isolation: embed, never propagate
        record_id = str(getattr(record, "id", "")) or "<unknown>"
        entry = TraceEntry(Stage.ERROR, f"{type(exc).__name__}: {exc}")
        return PipelineDecision(record_id, Verdict.EXCLUDED, Stage.ERROR, (entry,))


def route_batch(
    records: Iterable[MetadataRecord],
    config: PipelineConfig,
    lexicon: Lexicon,
    detector: LanguageDetector | None = None,
    soft_backend: ClassifierBackend | None = None,
    jobs: int = 1,
) -> Iterator[PipelineDecision]:
    """Route a stream of records, preserving input order.

    ``jobs`` > 1 fans classification out over a thread pool (useful when
    the soft backend is remote); submission is windowed so an unbounded
    input stream never materializes in memory. Per-record failures come
    back as EXCLUDED decisions at the ERROR stage.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if jobs == 1:
        for record in records:
            yield _safe_route(record, config, lexicon, detector, soft_backend)
        return

    def submit(record: MetadataRecord):
        return pool.submit(_safe_route, record, config, lexicon, detector, soft_backend)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        stream = iter(records)
        window: deque = deque(map(submit, itertools.islice(stream, jobs * 4)))
        while window:
            done = window.popleft()
            for record in itertools.islice(stream, 1):
                window.append(submit(record))
            yield done.result()


def _evidence_to_dict(evidence: ScoreBreakdown | Classification | None):
    if evidence is None:
        return None
    if isinstance(evidence, ScoreBreakdown):
        return {
            "type": "hard",
            "total_milli": evidence.total_milli,
            "matches": [
                {"pattern": m.pattern, "score_milli": m.score_milli, "token": m.token}
                for m in evidence.matches
            ],
        }
    return {"type": "soft", "label": evidence.label, "score": evidence.score}


def decision_to_dict(decision: PipelineDecision) -> dict:
    """Wire form: {id, verdict, deciding_stage, trace, evidence}."""
    return {
        "id": decision.record_id,
        "verdict": decision.verdict.value,
        "deciding_stage": decision.deciding_stage.value,
        "trace": [{"stage": t.stage.value, "outcome": t.outcome} for t in decision.trace],
        "evidence": _evidence_to_dict(decision.evidence),
    }

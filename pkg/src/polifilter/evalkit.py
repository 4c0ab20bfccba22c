"""Evaluation: confusion tallies, per-class metrics, and report rendering.

Counts form a commutative monoid under ``merge``, so partial tallies from
parallel workers combine by addition. All zero-denominator cases resolve
to 0, which keeps every report total and comparable. Rendered values use
3 decimals, rounding half away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable

from .softclf import LABELS

MARKDOWN_TABLE = "markdown-table"
TAB_SEPARATED = "tab-separated"
REPORT_FORMATS = (MARKDOWN_TABLE, TAB_SEPARATED)


@dataclass
class ConfusionCounts:
    """Tallies per ordered (gold, predicted) label pair.

    ``skipped`` counts pairs dropped for carrying an unknown label; they
    are excluded from every metric but never lost silently.
    """

    counts: dict[tuple[str, str], int] = field(
        default_factory=lambda: {(g, p): 0 for g in LABELS for p in LABELS}
    )
    skipped: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, gold: str, predicted: str) -> None:
        key = (gold, predicted)
        if key not in self.counts:
            self.skipped += 1
            return
        self.counts[key] += 1

    def merge(self, other: "ConfusionCounts") -> "ConfusionCounts":
        merged = ConfusionCounts(skipped=self.skipped + other.skipped)
        for key in merged.counts:
            merged.counts[key] = self.counts[key] + other.counts[key]
        return merged


@dataclass
class ConfusionTally:
    overall: ConfusionCounts
    by_language: dict[str, ConfusionCounts]


def confusion(pairs: Iterable[tuple]) -> ConfusionTally:
    """Tally (gold, predicted[, language]) pairs.

    Pairs with an unknown label are counted as skipped, overall only.
    Language sub-tallies cover pairs that carry a language code.
    """
    overall = ConfusionCounts()
    by_language: dict[str, ConfusionCounts] = {}
    for pair in pairs:
        gold, predicted = pair[0], pair[1]
        language = pair[2] if len(pair) > 2 else None
        if (gold, predicted) not in overall.counts:
            overall.skipped += 1
            continue
        overall.add(gold, predicted)
        if language is not None:
            by_language.setdefault(language, ConfusionCounts()).add(gold, predicted)
    return ConfusionTally(overall=overall, by_language=by_language)


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    total: int
    skipped: int = 0
    by_language: dict[str, "MetricsReport"] | None = None


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _class_metrics(counts: ConfusionCounts, label: str) -> ClassMetrics:
    tp = counts.counts[(label, label)]
    fp = sum(counts.counts[(g, label)] for g in LABELS if g != label)
    fn = sum(counts.counts[(label, p)] for p in LABELS if p != label)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return ClassMetrics(
        label=label,
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        support=tp + fn,
    )


def _label_present(counts: ConfusionCounts, label: str) -> bool:
    return any(
        counts.counts[key] for key in counts.counts if label in key
    )


def metrics(
    counts: ConfusionCounts,
    by_language: dict[str, ConfusionCounts] | None = None,
) -> MetricsReport:
    """Per-class precision/recall/F1/support plus overall accuracy.

    A class earns a row only if it occurs somewhere in the tally (as gold
    or as a prediction); a report over a single-class stream carries one
    row, an empty stream none.
    """
    total = counts.total
    diagonal = sum(counts.counts[(label, label)] for label in LABELS)
    sub_reports = None
    if by_language is not None:
        sub_reports = {code: metrics(sub) for code, sub in sorted(by_language.items())}
    return MetricsReport(
        per_class=tuple(
            _class_metrics(counts, label)
            for label in LABELS
            if _label_present(counts, label)
        ),
        accuracy=diagonal / total if total else 0.0,
        total=total,
        skipped=counts.skipped,
        by_language=sub_reports,
    )


def format_3dp(value: float) -> str:
    """Render at 3 decimals, half away from zero (0.8585 -> "0.859")."""
    return str(Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def _rows_plain(report: MetricsReport) -> list[list[str]]:
    rows = [["label", "precision", "recall", "f1-score", "support", "accuracy"]]
    for index, cm in enumerate(report.per_class):
        rows.append(
            [cm.label, format_3dp(cm.precision), format_3dp(cm.recall),
             format_3dp(cm.f1), str(cm.support),
             format_3dp(report.accuracy) if index == 0 else ""]
        )
    return rows


def _rows_by_language(report: MetricsReport) -> list[list[str]]:
    rows = [["label", "language", "precision", "recall", "f1-score", "support"]]
    assert report.by_language is not None
    for label in LABELS:
        for code in sorted(report.by_language):
            sub = report.by_language[code]
            cm = next((m for m in sub.per_class if m.label == label), None)
            if cm is None:
                continue
            rows.append(
                [label, code, format_3dp(cm.precision), format_3dp(cm.recall),
                 format_3dp(cm.f1), str(cm.support)]
            )
    return rows


def render_report(report: MetricsReport, format: str = MARKDOWN_TABLE) -> str:
    """One table, one row per present class; the accuracy column carries the
    approach-level value once, on the first data row. With sub-reports the
    view switches to the label-by-language breakdown (no accuracy column)."""
    if format not in REPORT_FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {REPORT_FORMATS}")
    rows = _rows_by_language(report) if report.by_language else _rows_plain(report)
    if format == TAB_SEPARATED:
        return "\n".join("\t".join(row) for row in rows) + "\n"
    lines = ["| " + " | ".join(rows[0]) + " |",
             "|" + "|".join(" --- " for _ in rows[0]) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows[1:]]
    return "\n".join(lines) + "\n"

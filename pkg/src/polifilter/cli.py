"""Operator entry point.

Subcommands: ``filter`` (route records to decisions), ``evaluate`` (score
predictions against gold labels), ``lexicon-check`` (validate a keyword
file), ``corpus`` (criteria selection and split), ``train-baseline`` (fit
the bag-of-words model). Exit codes are a stable contract: 0 success,
1 runtime or I/O failure, 2 usage error.

Everything streams: records in, decisions out, one line at a time. Given
identical inputs, config, and seed, decision and report outputs are
byte-identical across runs; only the manifest's wall time varies.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Iterator, TextIO

from . import __version__
from .corpusgen import (
    DdcRule,
    SelectionCriteria,
    labeled_from_dict,
    labeled_to_dict,
    select,
    split,
)
from .evalkit import MARKDOWN_TABLE, REPORT_FORMATS, confusion, metrics, render_report
from .ingest import IngestError, parse_records_dc_xml, parse_records_jsonl
from .langdetect import default_detector
from .lexicon import FieldMode, Lexicon, LexiconError, load_lexicon
from .pipeline import (
    Fallback,
    PipelineConfig,
    Stage,
    decision_to_dict,
    route_batch,
)
from .softclf import (
    BaselineModel,
    ClassifierInput,
    RemoteBackend,
    train_baseline,
)

SOFT_URL_ENV = "POLIFILTER_SOFT_URL"

_FIELD_MODES = {m.value: m for m in FieldMode}
_FALLBACKS = {f.value: f for f in Fallback}


class UsageError(Exception):
    """Bad invocation or unusable required input; maps to exit 2."""


def _split_csv(text: str) -> frozenset[str]:
    items = frozenset(part.strip() for part in text.split(",") if part.strip())
    if not items:
        raise UsageError(f"empty list value: {text!r}")
    return items


def _parse_config_file(path: str) -> dict:
    """Key-value config: one ``key = value`` per line, # comments."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    values: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{line_no}: expected key = value")
        values[key.strip()] = value.strip()
    return values


def _config_from_mapping(values: dict) -> PipelineConfig:
    config = PipelineConfig()
    known = {
        "allowed_doctypes": _split_csv,
        "allowed_sources": _split_csv,
        "min_abstract_words": int,
        "permitted_languages": _split_csv,
        "min_language_confidence": float,
        "hard_mode_no_abstract": _FIELD_MODES.__getitem__,
        "language_fallback": _FALLBACKS.__getitem__,
        "soft_error_fallback": _FALLBACKS.__getitem__,
        "soft_backend": str,
    }
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"unknown config key: {key}")
        try:
            config = replace(config, **{key: known[key](raw)})
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad config value for {key}: {raw!r} ({exc})") from None
    return config


def _build_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    config = _config_from_mapping(_parse_config_file(args.config)) if args.config else PipelineConfig()
    overrides: dict = {}
    if args.langs:
        overrides["permitted_languages"] = _split_csv(args.langs)
    if args.min_abstract_words is not None:
        overrides["min_abstract_words"] = args.min_abstract_words
    if args.hard_mode:
        overrides["hard_mode_no_abstract"] = _FIELD_MODES[args.hard_mode]
    if args.fallback:
        overrides["soft_error_fallback"] = _FALLBACKS[args.fallback]
    if args.lang_fallback:
        overrides["language_fallback"] = _FALLBACKS[args.lang_fallback]
    if args.doctypes:
        overrides["allowed_doctypes"] = _split_csv(args.doctypes)
    if args.sources:
        overrides["allowed_sources"] = _split_csv(args.sources)
    try:
        return replace(config, **overrides) if overrides else config
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _resolve_soft_selector(soft: str | None) -> str | None:
    env_url = os.environ.get(SOFT_URL_ENV)
    if soft is None:
        return f"remote:{env_url}" if env_url else None
    if soft == "none":
        return None
    if soft == "remote":
        if not env_url:
            raise UsageError(f"--soft remote needs a URL or {SOFT_URL_ENV}")
        return f"remote:{env_url}"
    if soft.startswith(("baseline:", "remote:")):
        kind, _, rest = soft.partition(":")
        if not rest:
            raise UsageError(f"--soft {kind}: needs a value")
        return soft
    raise UsageError(f"bad --soft selector: {soft!r}")


def _build_backend(selector: str | None):
    if selector is None:
        return None
    kind, _, rest = selector.partition(":")
    if kind == "baseline":
        try:
            return BaselineModel.load(rest)
        except OSError as exc:
            raise UsageError(f"cannot load baseline model: {exc}") from None
        except (ValueError, KeyError) as exc:
            raise RuntimeError(f"bad baseline model file: {exc}") from None
    return RemoteBackend(rest)


def _load_lexicon_arg(path: str) -> Lexicon:
    if not Path(path).exists():
        raise UsageError(f"lexicon file not found: {path}")
    try:
        return load_lexicon(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read lexicon: {exc}") from None


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
        return
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise RuntimeError(f"cannot open input: {exc}") from None
    with handle:
        yield handle


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        return
    try:
        handle = open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise RuntimeError(f"cannot open output: {exc}") from None
    with handle:
        yield handle


def _read_records(stream: TextIO, path: str, in_format: str):
    if in_format == "auto":
        in_format = "dc-xml" if path.endswith(".xml") else "jsonl"
    if in_format == "dc-xml":
        return parse_records_dc_xml(stream)
    return parse_records_jsonl(stream)


def _dump(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def cmd_filter(args: argparse.Namespace) -> int:
    config = _build_pipeline_config(args)
    lexicon = _load_lexicon_arg(args.lexicon)
    selector = _resolve_soft_selector(args.soft)
    config = replace(config, soft_backend=selector)
    backend = _build_backend(selector)
    detector = default_detector() if backend is not None else None

    started = time.monotonic()
    counts = {"read": 0, "politics": 0, "multi": 0, "excluded": 0}
    degraded = 0
    with _open_in(args.in_path) as src, _open_out(args.out) as dst:
        records, report = _read_records(src, args.in_path, args.in_format)
        decisions = route_batch(
            records, config, lexicon, detector, backend, jobs=args.jobs
        )
        for decision in decisions:
            counts["read"] += 1
            counts[decision.verdict.value] += 1
            if any(
                entry.stage is Stage.SOFT_FILTER and entry.outcome.startswith("transport-error")
                for entry in decision.trace
            ):
                degraded += 1
            dst.write(_dump(decision_to_dict(decision)) + "\n")

    if args.out != "-":
        manifest = {
            "config": _config_snapshot(config),
            "input": args.in_path,
            "output": args.out,
            "versions": {
                "polifilter": __version__,
                "python": ".".join(map(str, sys.version_info[:3])),
            },
            "counts": counts,
            "ingest": report.as_dict(),
            "soft_degraded": degraded,
            "wall_time_s": round(time.monotonic() - started, 6),
        }
        Path(args.out + ".manifest.json").write_text(
            json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    return 0


def _config_snapshot(config: PipelineConfig) -> dict:
    return {
        "allowed_doctypes": sorted(config.allowed_doctypes),
        "allowed_sources": sorted(config.allowed_sources) if config.allowed_sources else None,
        "min_abstract_words": config.min_abstract_words,
        "permitted_languages": sorted(config.permitted_languages),
        "min_language_confidence": config.min_language_confidence,
        "hard_mode_no_abstract": config.hard_mode_no_abstract.value,
        "language_fallback": config.language_fallback.value,
        "soft_error_fallback": config.soft_error_fallback.value,
        "soft_backend": config.soft_backend,
    }


def _load_jsonl(stream: TextIO, path: str) -> Iterator[dict]:
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RuntimeError(f"{path}:{line_no}: bad JSON ({exc})") from None
        if not isinstance(payload, dict):
            raise RuntimeError(f"{path}:{line_no}: expected an object")
        yield payload


def _prediction_label(payload: dict) -> str | None:
    # Decisions carry a verdict; plain prediction files carry a label.
    # EXCLUDED collapses to multi: the record was not selected as politics.
    value = payload.get("label") or payload.get("verdict")
    if value in ("politics", "multi"):
        return value
    if value == "excluded":
        return "multi"
    return None


def cmd_evaluate(args: argparse.Namespace) -> int:
    predictions: dict[str, str] = {}
    with _open_in(args.pred) as stream:
        for payload in _load_jsonl(stream, args.pred):
            record_id = payload.get("id")
            label = _prediction_label(payload)
            if record_id is None or label is None:
                raise RuntimeError(f"{args.pred}: prediction without id/label: {payload}")
            predictions[str(record_id)] = label

    pairs = []
    missing = 0
    with _open_in(args.gold) as stream:
        for payload in _load_jsonl(stream, args.gold):
            record_id = str(payload.get("id", ""))
            gold = payload.get("label") or payload.get("gold")
            predicted = predictions.get(record_id)
            if predicted is None:
                missing += 1
                print(f"warning: no prediction for id {record_id}", file=sys.stderr)
                continue
            pairs.append((gold, predicted, payload.get("language")))
    if missing:
        print(f"warning: {missing} gold records had no prediction", file=sys.stderr)

    tally = confusion(pairs)
    report = metrics(tally.overall, tally.by_language if args.by_language else None)
    if args.by_language and not tally.by_language:
        raise RuntimeError("--by-language given but gold records carry no language field")
    with _open_out(args.out) as dst:
        dst.write(render_report(report, args.format))
    if report.skipped:
        print(f"warning: {report.skipped} pairs skipped (unknown labels)", file=sys.stderr)
    return 0


def cmd_lexicon_check(args: argparse.Namespace) -> int:
    if not Path(args.lexicon).exists():
        raise UsageError(f"lexicon file not found: {args.lexicon}")
    try:
        lexicon = load_lexicon(Path(args.lexicon).read_text(encoding="utf-8"))
    except LexiconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"OK: {len(lexicon.entries)} entries")
    return 0


def _criteria_from_args(args: argparse.Namespace) -> SelectionCriteria:
    rule = args.ddc_rule
    if rule is None:
        rule = "in-320-328" if args.target == "politics" else "not-320-328"
    try:
        return SelectionCriteria(
            class_target=args.target,
            ddc_rule=DdcRule(rule),
            languages=_split_csv(args.langs),
            doctypes=_split_csv(args.doctypes),
            min_year=args.min_year,
            min_year_inclusive=args.min_year_inclusive,
            require_abstract=not args.no_require_abstract,
            min_abstract_words=args.min_abstract_words,
            exclusion_pattern=args.exclude_pattern,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_corpus(args: argparse.Namespace) -> int:
    criteria = _criteria_from_args(args)
    with _open_in(args.in_path) as src:
        records, _ = _read_records(src, args.in_path, args.in_format)
        selected = list(select(records, criteria))

    if criteria.exclusion_pattern:
        from .corpusgen import _matches_exclusion

        leaked = [r.id for r, _ in selected if _matches_exclusion(r, criteria.exclusion_pattern)]
        if leaked:  # self-audit of the exclusion post-condition
            raise RuntimeError(f"exclusion audit failed for ids: {leaked[:5]}")

    with _open_out(args.out) as dst:
        for item in selected:
            dst.write(_dump(labeled_to_dict(item)) + "\n")

    if args.split_dir:
        if not selected:
            raise RuntimeError("nothing selected; cannot split an empty corpus")
        parts = split(selected, seed=args.seed)
        out_dir = Path(args.split_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in ("train", "test", "validation"):
            part: tuple = getattr(parts, name)
            with open(out_dir / f"{name}.jsonl", "w", encoding="utf-8") as handle:
                for item in part:
                    handle.write(_dump(labeled_to_dict(item)) + "\n")
    print(f"selected: {len(selected)}", file=sys.stderr)
    return 0


def cmd_train_baseline(args: argparse.Namespace) -> int:
    corpus = []
    with _open_in(args.in_path) as stream:
        for payload in _load_jsonl(stream, args.in_path):
            try:
                record, label = labeled_from_dict(payload)
            except ValueError as exc:
                raise RuntimeError(f"{args.in_path}: {exc}") from None
            corpus.append((ClassifierInput.from_fields(record.title, record.abstract), label))
    try:
        model = train_baseline(corpus)
    except ValueError as exc:
        raise RuntimeError(str(exc)) from None
    model.save(args.out)
    print(f"trained on {len(corpus)} records -> {args.out}", file=sys.stderr)
    return 0


def _add_common_io(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--in", dest="in_path", required=True, help="input path or - for stdin")
    parser.add_argument("--out", default="-", help="output path or - for stdout")
    parser.add_argument(
        "--in-format", choices=("auto", "jsonl", "dc-xml"), default="auto",
        help="input format; auto picks dc-xml for .xml paths",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polifilter",
        description="Hybrid hard/soft filtering for political-science metadata records",
    )
    parser.add_argument("--version", action="version", version=f"polifilter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="route records through the pipeline")
    _add_common_io(p)
    p.add_argument("--lexicon", required=True, help="keyword/score TSV file")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--soft", help="baseline:<path> | remote:<url> | none")
    p.add_argument("--hard-mode", choices=sorted(_FIELD_MODES))
    p.add_argument("--langs", help="permitted languages, comma-separated")
    p.add_argument("--min-abstract-words", type=int)
    p.add_argument("--fallback", choices=sorted(_FALLBACKS),
                   help="what to do when the soft backend errors")
    p.add_argument("--lang-fallback", choices=sorted(_FALLBACKS),
                   help="what to do with non-permitted languages")
    p.add_argument("--doctypes", help="allowed document types, comma-separated")
    p.add_argument("--sources", help="allowed sources, comma-separated")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    p.add_argument("--gold", required=True, help="gold labels jsonl: {id, label, language?}")
    p.add_argument("--pred", required=True, help="decisions or predictions jsonl")
    p.add_argument("--out", default="-")
    p.add_argument("--by-language", action="store_true")
    p.add_argument("--format", choices=REPORT_FORMATS, default=MARKDOWN_TABLE)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lexicon-check", help="validate a lexicon file")
    p.add_argument("--lexicon", required=True)
    p.set_defaults(func=cmd_lexicon_check)

    p = sub.add_parser("corpus", help="select and split a labeled corpus")
    _add_common_io(p)
    p.add_argument("--target", choices=("politics", "multi"), required=True)
    p.add_argument("--langs", default="en")
    p.add_argument("--doctypes", default="article,review")
    p.add_argument("--ddc-rule", choices=tuple(r.value for r in DdcRule))
    p.add_argument("--min-year", type=int)
    p.add_argument("--min-year-inclusive", action="store_true")
    p.add_argument("--no-require-abstract", action="store_true")
    p.add_argument("--min-abstract-words", type=int, default=20)
    p.add_argument("--exclude-pattern")
    p.add_argument("--split-dir", help="also write train/test/validation files here")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("train-baseline", help="fit the bag-of-words baseline")
    _add_common_io(p)
    p.set_defaults(func=cmd_train_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except LexiconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Soft filter: classifier backends over a record's title and abstract.

Two backends sit behind one contract: a remote inference endpoint speaking
``POST <endpoint>/classify {"text": ...} -> {"label", "score"}``, and a
built-in multinomial bag-of-words baseline for desk-scale runs without any
model-serving infrastructure. Transport failures raise, they never fabricate
a classification; the pipeline decides what to do about them.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

import requests

from .records import tokenize

LABEL_POLITICS = "politics"
LABEL_MULTI = "multi"
LABELS = (LABEL_POLITICS, LABEL_MULTI)

MODEL_FORMAT_VERSION = 1

DEFAULT_TIMEOUT = 30.0


class TransportError(Exception):
    """The remote backend could not produce a usable classification."""


@dataclass(frozen=True)
class Classification:
    """One label with its confidence."""

    label: str
    score: float

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class ClassifierInput:
    """Title and abstract joined into one whitespace-normalized string."""

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("classifier input must be non-empty")

    @classmethod
    def from_fields(cls, title: str | None, abstract: str | None) -> "ClassifierInput":
        combined = " ".join(part for part in (title, abstract) if part)
        return cls(text=" ".join(combined.split()))


class ClassifierBackend(Protocol):
    def classify(self, input: ClassifierInput) -> Classification: ...


def classify(backend: ClassifierBackend, input: ClassifierInput) -> Classification:
    """Run one classification; deterministic for a fixed backend."""
    return backend.classify(input)


class BaselineModel:
    """Multinomial bag-of-words model with add-one smoothing.

    Class order is fixed (politics, multi); ties break toward the first
    class. Immutable once trained, so safe to share across workers.
    """

    def __init__(
        self,
        vocabulary: dict[str, int],
        log_priors: tuple[float, float],
        log_likelihoods: tuple[tuple[float, ...], tuple[float, ...]],
    ) -> None:
        self.classes = LABELS
        self.vocabulary = vocabulary
        self.log_priors = log_priors
        self.log_likelihoods = log_likelihoods

    def classify(self, input: ClassifierInput) -> Classification:
        vocabulary = self.vocabulary
        joints = list(self.log_priors)
        tables = self.log_likelihoods
        for token in tokenize(input.text):
            idx = vocabulary.get(token)
            if idx is not None:
                joints[0] += tables[0][idx]
                joints[1] += tables[1][idx]
        winner = 0 if joints[0] >= joints[1] else 1
        # Posterior of the winner; stable because the difference is <= 0.
        score = 1.0 / (1.0 + math.exp(joints[1 - winner] - joints[winner]))
        return Classification(label=self.classes[winner], score=min(score, 1.0))

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "classes": list(self.classes),
            "vocabulary": sorted(self.vocabulary, key=self.vocabulary.__getitem__),
            "log_priors": list(self.log_priors),
            "log_likelihoods": [list(row) for row in self.log_likelihoods],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "BaselineModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        version = payload.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version: {version!r}")
        if tuple(payload["classes"]) != LABELS:
            raise ValueError(f"unexpected class order: {payload['classes']!r}")
        return cls(
            vocabulary={token: i for i, token in enumerate(payload["vocabulary"])},
            log_priors=tuple(payload["log_priors"]),
            log_likelihoods=tuple(tuple(row) for row in payload["log_likelihoods"]),
        )


def train_baseline(corpus: Iterable[tuple[ClassifierInput, str]]) -> BaselineModel:
    """Fit the baseline from labeled inputs; order-independent (counts only).

    Raises ValueError unless both labels are present.
    """
    doc_counts = {label: 0 for label in LABELS}
    token_counts: dict[str, Counter] = {label: Counter() for label in LABELS}
    for input, label in corpus:
        if label not in LABELS:
            raise ValueError(f"unknown label {label!r} in training corpus")
        doc_counts[label] += 1
        token_counts[label].update(tokenize(input.text))
    if any(count == 0 for count in doc_counts.values()):
        raise ValueError("training corpus must contain at least one example per label")

    vocabulary = {
        token: i
        for i, token in enumerate(sorted(set().union(*token_counts.values())))
    }
    total_docs = sum(doc_counts.values())
    log_priors = tuple(math.log(doc_counts[label] / total_docs) for label in LABELS)
    likelihood_rows = []
    for label in LABELS:
        counter = token_counts[label]
        denom = sum(counter.values()) + len(vocabulary)
        likelihood_rows.append(
            tuple(math.log((counter[token] + 1) / denom) for token in vocabulary)
        )
    return BaselineModel(
        vocabulary=vocabulary,
        log_priors=log_priors,
        log_likelihoods=tuple(likelihood_rows),
    )


def _classify_url(endpoint: str) -> str:
    base = endpoint.rstrip("/")
    return base if base.endswith("/classify") else f"{base}/classify"


def _parse_remote_body(body: bytes) -> Classification:
    try:
        payload = json.loads(body)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise TransportError(f"malformed response body: {exc}") from None
    if not isinstance(payload, dict):
        raise TransportError(f"malformed response body: expected object, got {type(payload).__name__}")
    label = payload.get("label")
    score = payload.get("score")
    if label not in LABELS:
        raise TransportError(f"unknown label in response: {label!r}")
    if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0 <= score <= 1:
        raise TransportError(f"invalid score in response: {score!r}")
    return Classification(label=label, score=float(score))


def classify_remote(
    endpoint: str,
    input: ClassifierInput,
    timeout: float = DEFAULT_TIMEOUT,
    session: requests.Session | None = None,
) -> Classification:
    """POST the input text to a classify endpoint and parse the result.

    Any transport-level problem (connection, timeout, non-2xx, bad body,
    unknown label) raises TransportError; the caller never receives a
    made-up classification.
    """
    post = session.post if session is not None else requests.post
    try:
        response = post(_classify_url(endpoint), json={"text": input.text}, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"request to {endpoint} failed: {exc}") from exc
    if not 200 <= response.status_code < 300:
        raise TransportError(f"endpoint returned status {response.status_code}")
    return _parse_remote_body(response.content)


class RemoteBackend:
    """Client for an inference sidecar, bounded to ``max_in_flight`` requests."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = DEFAULT_TIMEOUT,
        max_in_flight: int = 8,
    ) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._limiter = threading.BoundedSemaphore(max_in_flight)
        self._session = requests.Session()

    def classify(self, input: ClassifierInput) -> Classification:
        with self._limiter:
            return classify_remote(
                self.endpoint, input, timeout=self.timeout, session=self._session
            )

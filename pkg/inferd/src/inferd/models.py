"""The two published checkpoints and the classification call around them.

The heavy dependencies (transformers, torch) are imported lazily so the
service module and its wire-contract tests work without them; they are
only needed to serve a real checkpoint.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

MODELS = {
    "sscibert": "kalawinka/SSciBERT_politics",
    "ml": "kalawinka/bert-base-ml-politics",
}
MAX_LENGTH = 512
LABELS = ("politics", "multi")

Classifier = Callable[[str], dict]


@dataclass(frozen=True)
class ModelSpec:
    """One published checkpoint plus its fixed tokenization settings.

    The sequence limit is part of the published usage contract: inputs are
    truncated at 512 tokens, never rejected for length.
    """

    model_id: str
    max_length: int = MAX_LENGTH
    truncation: bool = True

    def __post_init__(self) -> None:
        if self.model_id not in MODELS.values():
            raise ValueError(
                f"unknown model id {self.model_id!r}; expected one of {sorted(MODELS.values())}"
            )
        if self.max_length != MAX_LENGTH:
            raise ValueError(f"max_length is fixed at {MAX_LENGTH}")
        if self.truncation is not True:
            raise ValueError("truncation must stay enabled")

    @classmethod
    def from_alias(cls, alias: str) -> "ModelSpec":
        if alias not in MODELS:
            raise ValueError(f"unknown model alias {alias!r}; expected one of {sorted(MODELS)}")
        return cls(model_id=MODELS[alias])


def validate_classification(raw) -> dict:
    """Clamp a raw model answer to the wire contract or refuse it."""
    if not isinstance(raw, dict):
        raise ValueError(f"model produced a non-object answer: {raw!r}")
    label = raw.get("label")
    score = raw.get("score")
    if label not in LABELS:
        raise ValueError(f"model produced unknown label {label!r}")
    if not isinstance(score, (int, float)) or not 0.0 <= float(score) <= 1.0:
        raise ValueError(f"model produced out-of-range score {score!r}")
    return {"label": label, "score": float(score)}


@functools.lru_cache(maxsize=2)
def load_classifier(spec: ModelSpec) -> Classifier:
    """Build the text-classification callable for one checkpoint.

    Raises whatever the model loader raises (missing dependency, missing
    or undownloadable checkpoint); callers decide whether that is fatal.
    """
    from transformers import pipeline  # deferred: heavyweight import

    pipe = pipeline(
        "text-classification",
        model=spec.model_id,
        tokenizer=spec.model_id,
        max_length=spec.max_length,
        truncation=spec.truncation,
    )

    def classify(text: str) -> dict:
        return validate_classification(pipe(text)[0])

    return classify


def classify_text(spec: ModelSpec, text: str) -> dict:
    """Highest-probability label with its score for one non-empty text."""
    if not isinstance(text, str) or not text.strip():
        raise ValueError("text must be a non-empty string")
    return load_classifier(spec)(text)

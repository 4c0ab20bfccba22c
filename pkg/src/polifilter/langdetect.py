"""Language gate: abstract-language detection plus the permitted-set check.

The detector is an injected dependency so the pipeline can run with a stub;
the built-in implementation is a character-trigram profile model over a
small embedded corpus. It is a closed-world detector: it only ever answers
with one of its profiled languages, which is sufficient for gating the
three languages the classifier supports plus nearby European languages.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Protocol

from .records import tokenize

DEFAULT_PERMITTED = frozenset({"en", "de", "fr"})
DEFAULT_MIN_CONFIDENCE = 0.5

_MIN_TOKENS = 3


@dataclass(frozen=True)
class LangGuess:
    """Best-guess ISO-639-1 code with a posterior confidence."""

    code: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


class LanguageDetector(Protocol):
    """Contract for pluggable detectors.

    ``detect`` returns the best guess, or ``None`` (undetermined) for
    empty or too-short text (fewer than three tokens).
    """

    def detect(self, text: str) -> LangGuess | None: ...


def _trigrams(tokens: Iterable[str]) -> list[str]:
    grams: list[str] = []
    for token in tokens:
        padded = f" {token} "
        grams.extend(padded[i : i + 3] for i in range(len(padded) - 2))
    return grams


class NgramLanguageDetector:
    """Add-one-smoothed character-trigram model over per-language profiles.

    Deterministic for a fixed profile set; confidence is the posterior of
    the winning language under uniform priors.
    """

    def __init__(self, profiles: dict[str, str] | None = None) -> None:
        profiles = profiles if profiles is not None else _SEED_TEXTS
        if not profiles:
            raise ValueError("at least one language profile is required")
        counts = {
            code: Counter(_trigrams(tokenize(text)))
            for code, text in sorted(profiles.items())
        }
        vocabulary: set[str] = set()
        for counter in counts.values():
            vocabulary.update(counter)
        self._vocabulary = vocabulary
        self._log_likelihoods: dict[str, dict[str, float]] = {}
        for code, counter in counts.items():
            denom = sum(counter.values()) + len(vocabulary)
            self._log_likelihoods[code] = {
                gram: math.log((counter[gram] + 1) / denom) for gram in vocabulary
            }

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(self._log_likelihoods)

    def detect(self, text: str) -> LangGuess | None:
        tokens = tokenize(text)
        if len(tokens) < _MIN_TOKENS:
            return None
        grams = [g for g in _trigrams(tokens) if g in self._vocabulary]
        scores = {
            code: sum(table[g] for g in grams)
            for code, table in self._log_likelihoods.items()
        }
        best = min(scores, key=lambda c: (-scores[c], c))
        top = scores[best]
        total = sum(math.exp(s - top) for s in scores.values())
        return LangGuess(code=best, confidence=min(1.0, 1.0 / total))


_DEFAULT_DETECTOR: NgramLanguageDetector | None = None


def default_detector() -> NgramLanguageDetector:
    global _DEFAULT_DETECTOR
    if _DEFAULT_DETECTOR is None:
        _DEFAULT_DETECTOR = NgramLanguageDetector()
    return _DEFAULT_DETECTOR


def detect_language(text: str, detector: LanguageDetector | None = None) -> LangGuess | None:
    """Best language guess for ``text``, or ``None`` when undetermined."""
    return (detector or default_detector()).detect(text)


def is_permitted(
    guess: LangGuess | None,
    permitted: frozenset[str] | set[str] = DEFAULT_PERMITTED,
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
) -> bool:
    """True iff the guess is determined, confident enough, and in the set."""
    if not permitted:
        raise ValueError("permitted language set must be non-empty")
    return (
        guess is not None
        and guess.confidence >= min_confidence
        and guess.code in permitted
    )


# Embedded seed corpus: a few paragraphs of neutral scholarly prose per
# language. Function words and morphology carry the trigram signal.
_SEED_TEXTS = {
    "en": (
        "The committee reviewed the annual report and discussed changes to the "
        "research funding process. Many universities depend on public grants to "
        "support long term projects in science and education. The results of the "
        "survey were published in the spring issue of the journal. Researchers "
        "from several countries presented their findings during the conference "
        "in the capital. The library collects books, journals and digital "
        "resources for students and teachers. A new study describes how climate "
        "change affects coastal cities and local economies. The authors argue "
        "that better data would improve both theory and practice. Access to "
        "reliable information remains a central challenge for modern societies. "
        "This article examines the relationship between public institutions and "
        "the communities they serve, drawing on interviews and archival sources."
    ),
    "de": (
        "Der Ausschuss prüfte den Jahresbericht und diskutierte Änderungen am "
        "Verfahren der Forschungsförderung. Viele Universitäten sind auf "
        "öffentliche Mittel angewiesen, um langfristige Projekte in Wissenschaft "
        "und Bildung zu unterstützen. Die Ergebnisse der Umfrage wurden in der "
        "Frühjahrsausgabe der Zeitschrift veröffentlicht. Forscherinnen und "
        "Forscher aus mehreren Ländern stellten ihre Ergebnisse während der "
        "Konferenz in der Hauptstadt vor. Die Bibliothek sammelt Bücher, "
        "Zeitschriften und digitale Quellen für Studierende und Lehrende. Eine "
        "neue Studie beschreibt, wie der Klimawandel Küstenstädte und die "
        "lokale Wirtschaft beeinflusst. Die Autoren argumentieren, dass bessere "
        "Daten sowohl Theorie als auch Praxis verbessern würden. Der Zugang zu "
        "verlässlichen Informationen bleibt eine zentrale Herausforderung "
        "moderner Gesellschaften. Dieser Beitrag untersucht das Verhältnis "
        "zwischen öffentlichen Einrichtungen und den Gemeinden, denen sie dienen."
    ),
    "fr": (
        "Le comité a examiné le rapport annuel et discuté des modifications du "
        "processus de financement de la recherche. De nombreuses universités "
        "dépendent des subventions publiques pour soutenir des projets de longue "
        "durée dans les sciences et l'éducation. Les résultats de l'enquête ont "
        "été publiés dans le numéro de printemps de la revue. Des chercheurs de "
        "plusieurs pays ont présenté leurs travaux lors de la conférence dans la "
        "capitale. La bibliothèque rassemble des livres, des revues et des "
        "ressources numériques pour les étudiants et les enseignants. Une "
        "nouvelle étude décrit comment le changement climatique affecte les "
        "villes côtières et les économies locales. Les auteurs soutiennent que "
        "de meilleures données amélioreraient la théorie et la pratique. L'accès "
        "à une information fiable reste un défi central pour les sociétés "
        "modernes. Cet article examine la relation entre les institutions "
        "publiques et les communautés qu'elles servent."
    ),
    "es": (
        "El comité examinó el informe anual y discutió los cambios en el proceso "
        "de financiación de la investigación. Muchas universidades dependen de "
        "subvenciones públicas para sostener proyectos de larga duración en "
        "ciencia y educación. Los resultados de la encuesta fueron publicados en "
        "el número de primavera de la revista. Investigadores de varios países "
        "presentaron sus trabajos durante la conferencia en la capital. La "
        "biblioteca reúne libros, revistas y recursos digitales para estudiantes "
        "y profesores. Un nuevo estudio describe cómo el cambio climático afecta "
        "a las ciudades costeras y a las economías locales. Los autores "
        "sostienen que mejores datos mejorarían la teoría y la práctica. El "
        "acceso a información fiable sigue siendo un desafío central para las "
        "sociedades modernas. Este artículo examina la relación entre las "
        "instituciones públicas y las comunidades a las que sirven."
    ),
    "it": (
        "Il comitato ha esaminato il rapporto annuale e discusso le modifiche al "
        "processo di finanziamento della ricerca. Molte università dipendono da "
        "fondi pubblici per sostenere progetti di lunga durata nella scienza e "
        "nell'istruzione. I risultati dell'indagine sono stati pubblicati nel "
        "numero di primavera della rivista. Ricercatori di diversi paesi hanno "
        "presentato i loro lavori durante la conferenza nella capitale. La "
        "biblioteca raccoglie libri, riviste e risorse digitali per studenti e "
        "insegnanti. Un nuovo studio descrive come il cambiamento climatico "
        "influisce sulle città costiere e sulle economie locali. Gli autori "
        "sostengono che dati migliori migliorerebbero la teoria e la pratica. "
        "L'accesso a informazioni affidabili resta una sfida centrale per le "
        "società moderne. Questo articolo esamina la relazione tra le "
        "istituzioni pubbliche e le comunità che esse servono."
    ),
}

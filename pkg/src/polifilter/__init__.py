"""polifilter: hybrid hard/soft filtering for political-science metadata.

The hard filter scores records against a weighted wildcard keyword
lexicon; the soft filter delegates to a text classifier (built-in
baseline or remote endpoint). The pipeline routes each record through
type/source, DDC, abstract, and language gates to exactly one verdict,
with a full audit trace.
"""

__version__ = "0.1.0"

from .records import MetadataRecord, normalize, tokenize
from .lexicon import FieldMode, Lexicon, classify_hard, load_lexicon, score_record
from .langdetect import detect_language, is_permitted
from .softclf import BaselineModel, Classification, ClassifierInput, train_baseline
from .pipeline import PipelineConfig, PipelineDecision, Verdict, route, route_batch

__all__ = [
    "__version__",
    "MetadataRecord",
    "normalize",
    "tokenize",
    "FieldMode",
    "Lexicon",
    "classify_hard",
    "load_lexicon",
    "score_record",
    "detect_language",
    "is_permitted",
    "BaselineModel",
    "Classification",
    "ClassifierInput",
    "train_baseline",
    "PipelineConfig",
    "PipelineDecision",
    "Verdict",
    "route",
    "route_batch",
]

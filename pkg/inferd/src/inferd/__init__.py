"""Inference sidecar: published checkpoints behind the softclf wire contract."""

from .models import MODELS, ModelSpec, classify_text, load_classifier
from .service import InferenceServer, create_server, main, serve

__version__ = "0.1.0"

__all__ = [
    "MODELS",
    "ModelSpec",
    "classify_text",
    "load_classifier",
    "InferenceServer",
    "create_server",
    "serve",
    "main",
    "__version__",
]

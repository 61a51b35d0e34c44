"""Concept-based bilingual (Arabic/English) video search engine."""

from ._core import (
    DEFAULT_ALPHA,
    DEFAULT_K,
    ConfigError,
    DomainError,
    Engine,
    EvaluationError,
    IoError,
    LookupError,
    ParseError,
    ResolutionError,
    RitualError,
    Session,
    ValidationError,
    generate_corpus,
    precision_recall,
)

__all__ = [
    "DEFAULT_ALPHA",
    "DEFAULT_K",
    "ConfigError",
    "DomainError",
    "Engine",
    "EvaluationError",
    "IoError",
    "LookupError",
    "ParseError",
    "ResolutionError",
    "RitualError",
    "Session",
    "ValidationError",
    "generate_corpus",
    "precision_recall",
]

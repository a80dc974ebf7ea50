"""Attention exporter: raw text to ATN1 + bundle JSONL via a pre-trained LM."""

__version__ = "0.1.0"

from .export import ExportJob, ModelLoadError, chunk_only, export
from .text import chunk_noun_phrases, split_sentences, tokenize_words

__all__ = [
    "ExportJob",
    "ModelLoadError",
    "chunk_noun_phrases",
    "chunk_only",
    "export",
    "split_sentences",
    "tokenize_words",
]

"""Few-shot NER corpus synthesis: markup codec, sampling, curation and scoring."""

import json

from ._synthner import (
    DataError,
    Diagnostic,
    EncodeError,
    Sentence,
    Span,
    assemble_prompt,
    bio_tags,
    build_prompt,
    corpus_to_jsonl,
    dedup_key,
    encode_sentence,
    mock_completion,
    parse_document,
    parse_sentence,
    read_corpus_jsonl,
    sample_token,
    split,
    split_sizes,
    strip_markup,
    tempered_softmax,
    tokenize,
    top_p_filter,
)
from . import _synthner

__all__ = [
    "DataError", "Diagnostic", "EncodeError", "Sentence", "Span", "apply_filters",
    "assemble_prompt", "bio_tags", "build_prompt", "corpus_stats", "corpus_to_jsonl",
    "dedup_key", "encode_sentence", "mock_completion", "parse_document", "parse_sentence",
    "read_corpus_jsonl", "sample_token", "score", "split", "split_sizes", "strip_markup",
    "tempered_softmax", "tokenize", "top_p_filter",
]


def apply_filters(raw_jsonl, labels, stage_order="table"):
    """Curates raw-sample JSONL text; returns (sentences, report dict)."""
    sentences, report = _synthner._apply_filters(raw_jsonl, list(labels), stage_order)
    return sentences, json.loads(report)


def corpus_stats(sentences, labels):
    return json.loads(_synthner._corpus_stats(list(sentences), list(labels)))


def score(gold, gold_labels, pred, pred_labels=None, alias=None, weighting="chars"):
    """Character-wise strict scores as a dict with per-label rows and a weighted total."""
    report = _synthner._score(list(gold), list(gold_labels), list(pred),
                              list(pred_labels or gold_labels), alias, weighting == "entities")
    return json.loads(report)

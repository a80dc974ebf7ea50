"""Attention export: raw text -> ATN1 file + sentence bundles JSONL.

One forward pass of a pre-trained LM per batch, no fine-tuning.  Attention
is stored post-softmax for the requested layers and all heads.  Tokenization
adds no special tokens, so each stored S x S matrix covers exactly the
sentence's subwords and every row sums to 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .atn_format import AtnWriter, bundle_line, write_bundle_lines
from .text import chunk_noun_phrases, split_sentences, tokenize_words

log = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-4


class ModelLoadError(Exception):
    pass


@dataclass
class ExportJob:
    input_path: str
    model: str
    attention_path: str
    bundles_path: str
    layers: str = "last"  # "last" or "all"
    max_seq_len: int = 256
    batch_size: int = 32

    def __post_init__(self):
        if self.layers not in ("last", "all"):
            raise ValueError(f"layers must be 'last' or 'all', got {self.layers!r}")
        if self.max_seq_len < 1 or self.batch_size < 1:
            raise ValueError("max_seq_len and batch_size must be positive")


@dataclass
class PreparedSentence:
    sentence_id: str
    words: list[str]
    subword_map: list[tuple[int, int, int]]
    np_chunks: list[tuple[int, int]]


def load_model(name_or_path: str):
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(name_or_path)
        model = AutoModel.from_pretrained(name_or_path, attn_implementation="eager")
        model.eval()
        torch.set_grad_enabled(False)
        return tokenizer, model
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {name_or_path!r}: {exc}") from exc


def prepare_sentence(tokenizer, index: int, sentence: str, max_seq_len: int):
    """Tokenize one sentence; None (with a log line) when it cannot be used."""
    words = tokenize_words(sentence)
    if not words:
        return None
    encoding = tokenizer(words, is_split_into_words=True, add_special_tokens=False)
    word_ids = encoding.word_ids()
    if len(word_ids) == 0:
        log.warning("sentence %d produced no tokens, skipped", index)
        return None
    if len(word_ids) > max_seq_len:
        log.warning(
            "sentence %d has %d subwords, over the %d limit, skipped",
            index, len(word_ids), max_seq_len,
        )
        return None

    subword_map: list[tuple[int, int, int]] = []
    previous = None
    for position, word_id in enumerate(word_ids):
        if word_id is None:
            log.warning("sentence %d has unmapped subwords, skipped", index)
            return None
        if word_id != previous:
            subword_map.append((word_id, position, 1))
            previous = word_id
        else:
            word, start, count = subword_map[-1]
            subword_map[-1] = (word, start, count + 1)
    if [w for w, _, _ in subword_map] != list(range(len(words))):
        log.warning("sentence %d has words without subwords, skipped", index)
        return None

    return PreparedSentence(
        sentence_id=f"sent-{index:06d}",
        words=words,
        subword_map=subword_map,
        np_chunks=chunk_noun_phrases(words),
    )


def export(job: ExportJob) -> tuple[int, int]:
    """Run the export; returns (sentences exported, sentences skipped)."""
    import torch

    tokenizer, model = load_model(job.model)
    with open(job.input_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    sentences = split_sentences(text)

    prepared: list[PreparedSentence] = []
    skipped = 0
    for index, sentence in enumerate(sentences):
        item = prepare_sentence(tokenizer, index, sentence, job.max_seq_len)
        if item is None:
            skipped += 1
        else:
            prepared.append(item)

    lines = []
    with AtnWriter(job.attention_path) as writer:
        for base in range(0, len(prepared), job.batch_size):
            batch = prepared[base : base + job.batch_size]
            encoding = tokenizer(
                [item.words for item in batch],
                is_split_into_words=True,
                add_special_tokens=False,
                padding=True,
                return_tensors="pt",
            )
            with torch.no_grad():
                output = model(**encoding, output_attentions=True)
            # tuple of L tensors, each batch x heads x S_pad x S_pad
            stacked = torch.stack(output.attentions, dim=0)
            if job.layers == "last":
                stacked = stacked[-1:]
            lengths = encoding["attention_mask"].sum(dim=1).tolist()
            for sample, item in enumerate(batch):
                size = int(lengths[sample])
                tensor = stacked[:, sample, :, :size, :size].cpu().numpy()
                row_sums = tensor.sum(axis=-1)
                worst = float(np.abs(row_sums - 1.0).max())
                if worst > ROW_SUM_TOLERANCE:
                    raise AssertionError(
                        f"{item.sentence_id}: attention rows sum to 1 +/- {worst:.2e}, "
                        f"outside the {ROW_SUM_TOLERANCE} contract"
                    )
                writer.add(item.sentence_id, tensor)
                lines.append(
                    bundle_line(
                        item.sentence_id, item.words, item.subword_map, item.np_chunks
                    )
                )
    write_bundle_lines(job.bundles_path, lines)
    log.info(
        "exported %d sentences to %s / %s (%d skipped)",
        len(prepared), job.attention_path, job.bundles_path, skipped,
    )
    return len(prepared), skipped


def chunk_only(input_path: str, bundles_path: str) -> int:
    """Bundles without attention: words and chunks only, no model involved."""
    with open(input_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = []
    for index, sentence in enumerate(split_sentences(text)):
        words = tokenize_words(sentence)
        if not words:
            continue
        identity = [(i, i, 1) for i in range(len(words))]
        lines.append(
            bundle_line(
                f"sent-{index:06d}", words, identity, chunk_noun_phrases(words)
            )
        )
    return write_bundle_lines(bundles_path, lines)

"""Domain types shared by the whole extraction toolchain.

All types here are immutable value objects; they carry no file I/O and no
logic beyond invariant enforcement.  Extraction works on *words*: subword
bookkeeping exists only so attention matrices can be merged to word level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

L2R = "L2R"
R2L = "R2L"

HEAD_REDUCTIONS = ("mean", "max")
LAYER_SELECTIONS = ("last", "mean_all")


@dataclass(frozen=True, order=True)
class ChunkSpan:
    """A noun-phrase chunk: word interval [start, end) plus its surface text.

    The surface is stored redundantly so gold matching and debugging never
    need the parent sentence.
    """

    start: int
    end: int
    surface: str

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"chunk start must be >= 0, got {self.start}")
        if self.end <= self.start:
            raise ValueError(
                f"chunk end must exceed start, got [{self.start}, {self.end})"
            )

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, word_index: int) -> bool:
        return self.start <= word_index < self.end

    def overlaps(self, other: "ChunkSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SentenceBundle:
    """A tokenized, NP-chunked sentence plus the locator of its attention record.

    subword_map rows are (word_index, subword_start, subword_count); together
    they must partition the subword axis of the attention record.
    """

    sentence_id: str
    words: tuple[str, ...]
    subword_map: tuple[tuple[int, int, int], ...]
    np_chunks: tuple[ChunkSpan, ...]
    attention_ref: str

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(
            self, "subword_map", tuple(tuple(row) for row in self.subword_map)
        )
        object.__setattr__(self, "np_chunks", tuple(self.np_chunks))

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_subwords(self) -> int:
        return sum(count for _, _, count in self.subword_map)

    def chunk_pairs(self, bidirectional: bool = True):
        """Ordered chunk pairs to search: all orders, or left-to-right only."""
        chunks = self.np_chunks
        for i, a in enumerate(chunks):
            for j, b in enumerate(chunks):
                if i == j:
                    continue
                if not bidirectional and a.start > b.start:
                    continue
                yield a, b


class WordAttentionMatrix:
    """Square word-level association matrix (non-negative, finite)."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"attention matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("attention matrix contains non-finite values")
        if arr.size and arr.min() < 0:
            raise ValueError("attention matrix contains negative values")
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __repr__(self) -> str:
        return f"WordAttentionMatrix(n={self.n})"


@dataclass(frozen=True)
class Extraction:
    """One extracted triple: (arg0; predicate words; arg1) with its scores.

    predicate_words are (word_index, word) pairs in traversal order: indices
    strictly increase for L2R extractions and strictly decrease for R2L.
    raw_score is the sum of traversed association values; norm_score is
    raw_score / (len(predicate_words) + 1).
    """

    sentence_id: str
    arg0: ChunkSpan
    predicate_words: tuple[tuple[int, str], ...]
    arg1: ChunkSpan
    raw_score: float
    norm_score: float
    direction: str

    def __post_init__(self):
        object.__setattr__(
            self, "predicate_words", tuple(tuple(p) for p in self.predicate_words)
        )
        if self.direction not in (L2R, R2L):
            raise ValueError(f"direction must be L2R or R2L, got {self.direction!r}")

    @property
    def predicate_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.predicate_words)

    @property
    def predicate_text(self) -> str:
        return " ".join(w for _, w in self.predicate_words)

    def triple(self) -> tuple[str, str, str]:
        return (self.arg0.surface, self.predicate_text, self.arg1.surface)


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of the extraction pipeline with their default settings."""

    beam_size: int = 6
    score_threshold: float = 0.005
    min_predicate_frequency: int = 10
    head_reduction: str = "mean"
    layer_selection: str = "last"
    bidirectional: bool = True
    allow_empty_predicate: bool = False
    max_gap: int = 30

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.score_threshold < 0:
            raise ValueError(
                f"score_threshold must be >= 0, got {self.score_threshold}"
            )
        if self.min_predicate_frequency < 1:
            raise ValueError(
                "min_predicate_frequency must be >= 1, "
                f"got {self.min_predicate_frequency}"
            )
        if self.head_reduction not in HEAD_REDUCTIONS:
            raise ValueError(f"head_reduction must be one of {HEAD_REDUCTIONS}")
        if self.layer_selection not in LAYER_SELECTIONS:
            raise ValueError(f"layer_selection must be one of {LAYER_SELECTIONS}")
        if self.max_gap < 0:
            raise ValueError(f"max_gap must be >= 0, got {self.max_gap}")


def validate_bundle(bundle: SentenceBundle) -> list[str]:
    """Report every invariant violation in the bundle; empty list means valid.

    Never raises, whatever the field values.
    """
    problems: list[str] = []
    n = len(bundle.words)

    for k, chunk in enumerate(bundle.np_chunks):
        if not (0 <= chunk.start < chunk.end <= n):
            problems.append(
                f"chunk {k} [{chunk.start}, {chunk.end}) outside [0, {n})"
            )
            continue
        joined = " ".join(bundle.words[chunk.start : chunk.end])
        if chunk.surface != joined:
            problems.append(
                f"chunk {k} surface {chunk.surface!r} != joined words {joined!r}"
            )
    for k in range(1, len(bundle.np_chunks)):
        prev, cur = bundle.np_chunks[k - 1], bundle.np_chunks[k]
        if cur.start < prev.start:
            problems.append(f"chunks {k - 1} and {k} not sorted by start")
        elif prev.overlaps(cur):
            problems.append(f"chunks {k - 1} and {k} overlap")

    seen_words = [0] * n
    segments = []
    for row in bundle.subword_map:
        if len(row) != 3:
            problems.append(f"subword_map row {row!r} is not a triple")
            continue
        w, start, count = row
        if not (0 <= w < n):
            problems.append(f"subword_map references word {w} outside [0, {n})")
        else:
            seen_words[w] += 1
        if count < 1:
            problems.append(f"word {w} maps to {count} subwords, need >= 1")
        if start < 0:
            problems.append(f"word {w} has negative subword start {start}")
        segments.append((start, count, w))

    for w, hits in enumerate(seen_words):
        if hits == 0:
            problems.append(f"word {w} missing from subword_map")
        elif hits > 1:
            problems.append(f"word {w} appears {hits} times in subword_map")

    segments.sort()
    cursor = 0
    for start, count, w in segments:
        if count < 1 or start < 0:
            continue
        if start > cursor:
            problems.append(f"subword gap before index {start} (word {w})")
        elif start < cursor:
            problems.append(f"subword overlap at index {start} (word {w})")
        cursor = max(cursor, start + count)

    return problems

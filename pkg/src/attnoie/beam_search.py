"""Attention-guided beam search for predicate extraction.

Given an argument pair, the search walks the sentence from the boundary of
the first argument toward the second, scoring each hop with the word-level
association value.  Actions per candidate: start (seed at step 0), yield
(append the next word), stop (land on the terminal argument and emit a
triple).  Yield and stop expansions compete for the k beam slots at every
step; a candidate that completes releases its slot.

Scores are path sums of association values; the beam ranks by raw sum
(normalization needs the final length), and the reported confidence is
raw_score / (len(predicate) + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    L2R,
    R2L,
    ChunkSpan,
    Extraction,
    ExtractionConfig,
    SentenceBundle,
    WordAttentionMatrix,
)

ACTION_START = "start"
ACTION_YIELD = "yield"
ACTION_STOP = "stop"


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Candidate:
    """A beam entry: word-index path and its accumulated association score."""

    path: tuple[int, ...]
    total_score: float
    complete: bool = False

    def action(self) -> str:
        return ACTION_STOP if self.complete else ACTION_YIELD


def association(matrix: WordAttentionMatrix, i: int, j: int) -> float:
    """Association between words i and j: the larger of the two directions.

    Causal models only populate one triangle, so orientation is folded away.
    """
    n = matrix.n
    if not (0 <= i < n) or not (0 <= j < n):
        raise IndexOutOfRange(f"indices ({i}, {j}) outside word range [0, {n})")
    values = matrix.values
    return float(max(values[i, j], values[j, i]))


def beam_search_pair(
    bundle: SentenceBundle,
    matrix: WordAttentionMatrix,
    arg0: ChunkSpan,
    arg1: ChunkSpan,
    config: ExtractionConfig,
) -> list[Extraction]:
    """All completed triples for one ordered argument pair.

    Direction follows span order: arg0 left of arg1 searches left-to-right,
    arg0 right of arg1 searches right-to-left.  Ties in score break toward
    the lexicographically smaller path, so output is deterministic.
    """
    if arg0 == arg1 or arg0.overlaps(arg1):
        raise ValueError(f"argument spans must be disjoint, got {arg0} and {arg1}")
    n = matrix.n
    if arg0.end > n or arg1.end > n:
        raise IndexOutOfRange(
            f"argument spans {arg0}, {arg1} exceed matrix size {n}"
        )

    if arg0.end <= arg1.start:
        direction = L2R
        seed = arg0.end - 1
        terminal = arg1.start
        interior = range(arg0.end, arg1.start)
        step = 1
    else:
        direction = R2L
        seed = arg0.start
        terminal = arg1.end - 1
        interior = range(arg0.start - 1, arg1.end - 1, -1)
        step = -1

    gap = len(interior)
    if gap > config.max_gap:
        return []

    assoc = np.maximum(matrix.values, matrix.values.T)

    actives = [Candidate(path=(seed,), total_score=0.0)]
    completed: list[Candidate] = []
    while actives:
        pool: list[Candidate] = []
        for cand in actives:
            last = cand.path[-1]
            nexts = range(last + 1, terminal) if step == 1 else range(last - 1, terminal, -1)
            for nxt in nexts:
                pool.append(
                    Candidate(
                        path=cand.path + (nxt,),
                        total_score=cand.total_score + assoc[last, nxt],
                    )
                )
            pool.append(
                Candidate(
                    path=cand.path + (terminal,),
                    total_score=cand.total_score + assoc[last, terminal],
                    complete=True,
                )
            )
        pool.sort(key=lambda c: (-c.total_score, c.path))
        kept = pool[: config.beam_size]
        completed.extend(c for c in kept if c.complete)
        actives = [c for c in kept if not c.complete]

    extractions = []
    for cand in completed:
        pred_indices = cand.path[1:-1]
        if not pred_indices and not config.allow_empty_predicate:
            continue
        predicate_words = tuple((i, bundle.words[i]) for i in pred_indices)
        raw = float(cand.total_score)
        extractions.append(
            Extraction(
                sentence_id=bundle.sentence_id,
                arg0=arg0,
                predicate_words=predicate_words,
                arg1=arg1,
                raw_score=raw,
                norm_score=raw / (len(pred_indices) + 1),
                direction=direction,
            )
        )
    extractions.sort(key=lambda e: (-e.norm_score, e.predicate_indices))
    return extractions


def extract_sentence(
    bundle: SentenceBundle, matrix: WordAttentionMatrix, config: ExtractionConfig
) -> list[Extraction]:
    """Union of beam searches over every ordered chunk pair of the sentence.

    Duplicate (arg0, predicate, arg1) triples keep their best score; results
    below the confidence threshold are dropped.
    """
    if len(bundle.np_chunks) < 2:
        return []

    best: dict[tuple, Extraction] = {}
    for arg0, arg1 in bundle.chunk_pairs(config.bidirectional):
        for ext in beam_search_pair(bundle, matrix, arg0, arg1, config):
            key = (ext.arg0, ext.predicate_words, ext.arg1)
            cur = best.get(key)
            if cur is None or ext.norm_score > cur.norm_score:
                best[key] = ext

    kept = [e for e in best.values() if e.norm_score >= config.score_threshold]
    kept.sort(
        key=lambda e: (
            -e.norm_score,
            e.arg0.start,
            e.arg1.start,
            e.predicate_indices,
        )
    )
    return kept

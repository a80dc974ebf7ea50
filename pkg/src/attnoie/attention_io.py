"""Attention persistence and word-level reduction.

The ATN1 container holds one dense attention tensor per sentence:

    header:  magic b"ATN1" | u32 version | u32 record count
    record:  u32 id length | id bytes (UTF-8) | u32 L | u32 H | u32 S
             | L*H*S*S float32 values, row-major

All integers are little-endian unsigned 32-bit; values are little-endian
float32, so a write/read round trip is byte-exact on the value payload.

A companion JSONL file carries one SentenceBundle per line.
"""

from __future__ import annotations

import json
import struct
from typing import Iterable, Sequence

import numpy as np

from .model import ChunkSpan, SentenceBundle, WordAttentionMatrix

MAGIC = b"ATN1"
VERSION = 1

_U32 = struct.Struct("<I")


class AttentionIOError(Exception):
    """Base class for attention file problems."""


class BadMagic(AttentionIOError):
    pass


class VersionMismatch(AttentionIOError):
    pass


class MissingRecord(AttentionIOError):
    pass


class TruncatedRecord(AttentionIOError):
    pass


class EmptyTensor(AttentionIOError):
    pass


class LayerUnavailable(AttentionIOError):
    pass


class MapGap(AttentionIOError):
    pass


class MapOverlap(AttentionIOError):
    pass


def write_attention_file(path, records: Iterable[tuple[str, np.ndarray]]) -> int:
    """Write (sentence_id, tensor[L, H, S, S]) records; returns record count."""
    items = []
    for sentence_id, tensor in records:
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        if arr.ndim != 4:
            raise ValueError(
                f"attention tensor for {sentence_id!r} must be L x H x S x S, "
                f"got shape {arr.shape}"
            )
        if arr.shape[2] != arr.shape[3]:
            raise ValueError(
                f"attention tensor for {sentence_id!r} is not square: {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"attention tensor for {sentence_id!r} is not finite")
        items.append((sentence_id, arr))

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(VERSION))
        fh.write(_U32.pack(len(items)))
        for sentence_id, arr in items:
            ident = sentence_id.encode("utf-8")
            fh.write(_U32.pack(len(ident)))
            fh.write(ident)
            length, heads, size, _ = arr.shape
            fh.write(_U32.pack(length))
            fh.write(_U32.pack(heads))
            fh.write(_U32.pack(size))
            fh.write(arr.tobytes())
    return len(items)


class AttentionFileReader:
    """Random-access reader over an ATN1 file.

    The whole file is indexed at open time, so truncation is reported
    eagerly and reads after open are pure.  Multiple concurrent readers
    are safe; there is no read-during-write contract.
    """

    def __init__(self, path):
        self._path = path
        self._fh = open(path, "rb")
        try:
            self._fh.seek(0, 2)
            self._size = self._fh.tell()
            self._fh.seek(0)
            self._index = self._scan()
        except Exception:
            self._fh.close()
            raise

    def _read_u32(self, what: str) -> int:
        raw = self._fh.read(4)
        if len(raw) != 4:
            raise TruncatedRecord(f"{self._path}: truncated while reading {what}")
        return _U32.unpack(raw)[0]

    def _scan(self) -> dict[str, tuple[int, tuple[int, int, int]]]:
        magic = self._fh.read(4)
        if len(magic) != 4 or magic != MAGIC:
            raise BadMagic(f"{self._path}: expected magic {MAGIC!r}, got {magic!r}")
        version = self._read_u32("version")
        if version != VERSION:
            raise VersionMismatch(
                f"{self._path}: file version {version}, reader supports {VERSION}"
            )
        count = self._read_u32("record count")
        index: dict[str, tuple[int, tuple[int, int, int]]] = {}
        for k in range(count):
            id_len = self._read_u32(f"record {k} id length")
            ident = self._fh.read(id_len)
            if len(ident) != id_len:
                raise TruncatedRecord(f"{self._path}: truncated id in record {k}")
            length = self._read_u32(f"record {k} layer count")
            heads = self._read_u32(f"record {k} head count")
            size = self._read_u32(f"record {k} subword count")
            offset = self._fh.tell()
            payload = length * heads * size * size * 4
            if offset + payload > self._size:
                raise TruncatedRecord(
                    f"{self._path}: record {k} payload runs past end of file"
                )
            self._fh.seek(payload, 1)
            index[ident.decode("utf-8")] = (offset, (length, heads, size))
        return index

    def sentence_ids(self) -> list[str]:
        return list(self._index)

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._index

    def __len__(self) -> int:
        return len(self._index)

    def read_record(self, sentence_id: str) -> np.ndarray:
        """Return the stored L x H x S x S float32 tensor for one sentence."""
        try:
            offset, (length, heads, size) = self._index[sentence_id]
        except KeyError:
            raise MissingRecord(
                f"{self._path}: no attention record for {sentence_id!r}"
            ) from None
        self._fh.seek(offset)
        payload = length * heads * size * size * 4
        raw = self._fh.read(payload)
        if len(raw) != payload:
            raise TruncatedRecord(
                f"{self._path}: record {sentence_id!r} payload truncated"
            )
        return np.frombuffer(raw, dtype="<f4").reshape(length, heads, size, size)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "AttentionFileReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_record(path, sentence_id: str) -> np.ndarray:
    """One-shot convenience wrapper around AttentionFileReader."""
    with AttentionFileReader(path) as reader:
        return reader.read_record(sentence_id)


def reduce_heads(
    tensor: np.ndarray, layer_selection: str = "last", head_reduction: str = "mean"
) -> np.ndarray:
    """Collapse an L x H x S x S tensor to a single S x S matrix.

    layer_selection picks the last layer or the mean over all layers;
    head_reduction then combines heads element-wise.
    """
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim != 4:
        raise ValueError(f"expected L x H x S x S tensor, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyTensor(f"tensor with shape {arr.shape} has no layers or heads")

    if layer_selection == "last":
        per_head = arr[-1]
    elif layer_selection == "mean_all":
        per_head = arr.mean(axis=0)
    else:
        raise ValueError(f"unknown layer_selection {layer_selection!r}")

    if head_reduction == "mean":
        return per_head.mean(axis=0)
    if head_reduction == "max":
        return per_head.max(axis=0)
    raise ValueError(f"unknown head_reduction {head_reduction!r}")


def merge_subwords(
    matrix: np.ndarray, subword_map: Sequence[tuple[int, int, int]]
) -> WordAttentionMatrix:
    """Merge a subword-level S x S matrix to word level.

    Attention TO a word sums that word's columns; attention FROM a word
    averages its rows, applied in that order.  The map must partition
    [0, S) or MapGap / MapOverlap is raised.
    """
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected square matrix, got shape {arr.shape}")
    size = arr.shape[0]

    covered = np.zeros(size, dtype=bool)
    by_word: dict[int, tuple[int, int]] = {}
    for word, start, count in subword_map:
        if count < 1 or start < 0 or start + count > size:
            raise MapGap(
                f"word {word} segment [{start}, {start + count}) invalid for S={size}"
            )
        if word in by_word:
            raise MapOverlap(f"word {word} mapped twice")
        seg = covered[start : start + count]
        if seg.any():
            raise MapOverlap(f"word {word} segment [{start}, {start + count}) overlaps")
        covered[start : start + count] = True
        by_word[word] = (start, count)
    if not covered.all():
        missing = int(np.flatnonzero(~covered)[0])
        raise MapGap(f"subword {missing} not covered by the map")
    n_words = len(by_word)
    if sorted(by_word) != list(range(n_words)):
        raise MapGap(f"word indices {sorted(by_word)} do not cover 0..{n_words - 1}")

    segments = [by_word[w] for w in range(n_words)]
    col_summed = np.empty((size, n_words), dtype=np.float64)
    for w, (start, count) in enumerate(segments):
        col_summed[:, w] = arr[:, start : start + count].sum(axis=1)
    merged = np.empty((n_words, n_words), dtype=np.float64)
    for w, (start, count) in enumerate(segments):
        merged[w, :] = col_summed[start : start + count, :].mean(axis=0)
    return WordAttentionMatrix(merged)


def word_matrix_for_bundle(
    reader: AttentionFileReader, bundle: SentenceBundle, layer_selection: str, head_reduction: str
) -> WordAttentionMatrix:
    """Load, reduce and merge the attention record referenced by a bundle."""
    tensor = reader.read_record(bundle.attention_ref)
    if layer_selection == "mean_all" and tensor.shape[0] == 1:
        raise LayerUnavailable(
            f"record {bundle.attention_ref!r} stores a single layer; "
            "mean_all needs an export with all layers"
        )
    reduced = reduce_heads(tensor, layer_selection, head_reduction)
    return merge_subwords(reduced, bundle.subword_map)


def bundle_to_json(bundle: SentenceBundle) -> dict:
    return {
        "sentence_id": bundle.sentence_id,
        "words": list(bundle.words),
        "subword_map": [list(row) for row in bundle.subword_map],
        "np_chunks": [
            {"start": c.start, "end": c.end, "surface": c.surface}
            for c in bundle.np_chunks
        ],
        "attention_ref": bundle.attention_ref,
    }


def bundle_from_json(obj: dict) -> SentenceBundle:
    return SentenceBundle(
        sentence_id=obj["sentence_id"],
        words=tuple(obj["words"]),
        subword_map=tuple(tuple(row) for row in obj["subword_map"]),
        np_chunks=tuple(
            ChunkSpan(c["start"], c["end"], c["surface"]) for c in obj["np_chunks"]
        ),
        attention_ref=obj["attention_ref"],
    )


def write_bundles(path, bundles: Iterable[SentenceBundle]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for bundle in bundles:
            fh.write(json.dumps(bundle_to_json(bundle), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def read_bundles(path) -> list[SentenceBundle]:
    bundles = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                bundles.append(bundle_from_json(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad bundle record: {exc}") from exc
    return bundles

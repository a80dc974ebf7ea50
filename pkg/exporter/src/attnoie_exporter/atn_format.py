"""Writers for the interchange files the extraction engine consumes.

ATN1 container layout (little-endian throughout):

    magic b"ATN1" | u32 version (1) | u32 record count
    per record: u32 id length | id bytes (UTF-8)
                | u32 L | u32 H | u32 S | L*H*S*S float32, row-major

The companion bundles file is JSONL, one sentence per line with keys
sentence_id, words, subword_map, np_chunks, attention_ref.
"""

from __future__ import annotations

import json
import struct
from typing import Iterable

import numpy as np

MAGIC = b"ATN1"
VERSION = 1


class AtnWriter:
    """Streaming ATN1 writer; call finish() (or use as a context manager)."""

    def __init__(self, path):
        self._path = path
        self._fh = open(path, "wb")
        self._fh.write(MAGIC)
        self._fh.write(struct.pack("<I", VERSION))
        self._count_pos = self._fh.tell()
        self._fh.write(struct.pack("<I", 0))
        self._count = 0

    def add(self, sentence_id: str, tensor: np.ndarray) -> None:
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
            raise ValueError(
                f"attention tensor for {sentence_id!r} must be L x H x S x S, "
                f"got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"attention tensor for {sentence_id!r} is not finite")
        ident = sentence_id.encode("utf-8")
        self._fh.write(struct.pack("<I", len(ident)))
        self._fh.write(ident)
        for dim in arr.shape[:3]:
            self._fh.write(struct.pack("<I", dim))
        self._fh.write(arr.tobytes())
        self._count += 1

    def finish(self) -> int:
        self._fh.seek(self._count_pos)
        self._fh.write(struct.pack("<I", self._count))
        self._fh.close()
        return self._count

    def __enter__(self) -> "AtnWriter":
        return self

    def __exit__(self, exc_type, *rest) -> None:
        if exc_type is None:
            self.finish()
        else:
            self._fh.close()


def bundle_line(
    sentence_id: str,
    words: list[str],
    subword_map: list[tuple[int, int, int]],
    np_chunks: list[tuple[int, int]],
) -> str:
    record = {
        "sentence_id": sentence_id,
        "words": list(words),
        "subword_map": [list(row) for row in subword_map],
        "np_chunks": [
            {"start": s, "end": e, "surface": " ".join(words[s:e])}
            for s, e in np_chunks
        ],
        "attention_ref": sentence_id,
    }
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_bundle_lines(path, lines: Iterable[str]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
            count += 1
    return count

"""Dictionary-based entity linking and distant-supervision alignment.

Mentions are linked by greedy longest match against a surface-to-entity
dictionary; sentences whose linked entity pairs carry a KG triple yield
gold triples with the linked spans.  Pronouns are never linked (no
coreference resolution here), which is a known recall gap.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .metrics import GoldTriple
from .model import ChunkSpan, SentenceBundle

PRONOUNS = frozenset(
    """
    i me my mine myself we us our ours ourselves you your yours yourself
    he him his himself she her hers herself it its itself they them their
    theirs themselves this that these those who whom whose which what
    """.split()
)


@dataclass(frozen=True)
class LinkedMention:
    chunk: ChunkSpan
    entity_id: str
    probability: float


class MentionDictionary:
    """Case-folded surface mention -> entities ranked by probability."""

    def __init__(self, entries: dict[str, list[tuple[str, float]]] | None = None):
        self._entries: dict[str, tuple[tuple[str, float], ...]] = {}
        self.max_words = 0
        if entries:
            for surface, candidates in entries.items():
                self.add_all(surface, candidates)

    def add_all(self, surface: str, candidates: Iterable[tuple[str, float]]) -> None:
        key = surface.casefold()
        merged = dict(self._entries.get(key, ()))
        for entity_id, probability in candidates:
            if not (0.0 < probability <= 1.0):
                raise ValueError(
                    f"probability for {surface!r} -> {entity_id!r} must be in (0, 1], "
                    f"got {probability}"
                )
            merged[entity_id] = probability
        ranked = tuple(
            sorted(merged.items(), key=lambda item: (-item[1], item[0]))
        )
        self._entries[key] = ranked
        self.max_words = max(self.max_words, len(key.split()))

    def lookup(self, surface: str) -> tuple[tuple[str, float], ...]:
        return self._entries.get(surface.casefold(), ())

    def __contains__(self, surface: str) -> bool:
        return surface.casefold() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def surfaces(self) -> list[str]:
        return sorted(self._entries)

    @classmethod
    def from_tsv(cls, path) -> "MentionDictionary":
        """Load 'mention<TAB>entity_id<TAB>probability' rows."""
        by_surface: dict[str, list[tuple[str, float]]] = defaultdict(list)
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(
                        f"{path}:{line_no}: expected 'mention<TAB>entity<TAB>probability'"
                    )
                by_surface[parts[0]].append((parts[1], float(parts[2])))
        dictionary = cls()
        for surface, candidates in by_surface.items():
            dictionary.add_all(surface, candidates)
        return dictionary

    def to_tsv(self, path) -> int:
        count = 0
        with open(path, "w", encoding="utf-8") as fh:
            for surface in self.surfaces():
                for entity_id, probability in self._entries[surface]:
                    fh.write(f"{surface}\t{entity_id}\t{probability:.6g}\n")
                    count += 1
        return count


class KGStore:
    """Knowledge-graph triples indexed by (subject entity, object entity)."""

    def __init__(self, triples: Iterable[tuple[str, str, str]] = ()):
        self._by_pair: dict[tuple[str, str], set[str]] = defaultdict(set)
        self._count = 0
        for subject, predicate, obj in triples:
            self.add(subject, predicate, obj)

    def add(self, subject: str, predicate: str, obj: str) -> None:
        pair = (subject, obj)
        if predicate not in self._by_pair[pair]:
            self._by_pair[pair].add(predicate)
            self._count += 1

    def predicates(self, subject: str, obj: str) -> set[str]:
        return set(self._by_pair.get((subject, obj), ()))

    def __contains__(self, triple: tuple[str, str, str]) -> bool:
        subject, predicate, obj = triple
        return predicate in self._by_pair.get((subject, obj), ())

    def __len__(self) -> int:
        return self._count

    @classmethod
    def from_tsv(cls, path) -> "KGStore":
        """Load 'subject<TAB>predicate<TAB>object' rows."""
        store = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(
                        f"{path}:{line_no}: expected 'subject<TAB>predicate<TAB>object'"
                    )
                store.add(*parts)
        return store


def link_mentions(
    bundle: SentenceBundle, dictionary: MentionDictionary
) -> list[LinkedMention]:
    """Greedy longest-match scan of the word sequence.

    Each matched span maps to its top-probability entity; matched spans
    never overlap; pronoun surfaces are skipped.
    """
    words = bundle.words
    n = len(words)
    linked: list[LinkedMention] = []
    i = 0
    while i < n:
        hit = None
        longest = min(dictionary.max_words, n - i)
        for width in range(longest, 0, -1):
            surface = " ".join(words[i : i + width])
            folded = surface.casefold()
            if folded in PRONOUNS:
                continue
            candidates = dictionary.lookup(surface)
            if candidates:
                entity_id, probability = candidates[0]
                hit = LinkedMention(
                    chunk=ChunkSpan(i, i + width, surface),
                    entity_id=entity_id,
                    probability=probability,
                )
                break
        if hit is None:
            i += 1
        else:
            linked.append(hit)
            i = hit.chunk.end
    return linked


def align_distant(
    bundle: SentenceBundle, linked: Sequence[LinkedMention], kg: KGStore
) -> list[GoldTriple]:
    """Gold triples for every ordered pair of distinct linked entities that
    the KG connects; spans come from the linked chunks.
    """
    golds: list[GoldTriple] = []
    for a in linked:
        for b in linked:
            if a.chunk == b.chunk or a.entity_id == b.entity_id:
                continue
            for predicate in sorted(kg.predicates(a.entity_id, b.entity_id)):
                golds.append(
                    GoldTriple(
                        sentence_id=bundle.sentence_id,
                        arg0_surface=a.chunk.surface,
                        predicate=predicate,
                        arg1_surface=b.chunk.surface,
                        arg0_span=(a.chunk.start, a.chunk.end),
                        arg1_span=(b.chunk.start, b.chunk.end),
                    )
                )
    return golds

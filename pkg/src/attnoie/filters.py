"""Corpus-level post-extraction constraints.

Two survive from the ReVerb tradition: a predicate must occur often enough
across the corpus to be meaningful, and it must be a contiguous word run in
its sentence.  Predicate phrases are normalized (case fold, auxiliary and
adverb removal, light suffix stripping) before counting so inflectional
variants pool together.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .model import Extraction, SentenceBundle

# Words that end in a strippable suffix but are not inflected forms.
_NO_STRIP = frozenset(
    """
    during ring sing king thing spring bring sting wing string something
    nothing anything everything morning evening
    is his its this was has us bus gas yes less unless plus various
    news series species
    red bed wed ted fed led shed bred
    """.split()
)

_VOWELS = set("aeiou")


def _strip_suffix(token: str) -> str:
    """Light suffix stripping for s/es/ed/ing endings; no dictionary lookup."""
    if token in _NO_STRIP or len(token) < 4:
        return token
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith("ied") and len(token) > 4:
        return token[:-3] + "y"
    for suffix in ("ing", "ed"):
        if token.endswith(suffix):
            stem = token[: -len(suffix)]
            if len(stem) < 3:
                return token
            if (
                len(stem) >= 4
                and stem[-1] == stem[-2]
                and stem[-1] not in _VOWELS
                and stem[-1] not in "ls"
            ):
                stem = stem[:-1]
            return stem
    if token.endswith(("sses", "ches", "shes", "xes", "zes")):
        return token[:-2]
    if token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def load_stop_list(path) -> frozenset[str]:
    """One token per line, UTF-8; '#' starts a comment."""
    tokens = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.add(line.casefold())
    return frozenset(tokens)


def _packaged_list(name: str) -> frozenset[str]:
    text = resources.files("attnoie.data").joinpath(name).read_text("utf-8")
    tokens = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.add(line.casefold())
    return frozenset(tokens)


def default_aux_words() -> frozenset[str]:
    return _packaged_list("aux_words.txt")


def default_adverb_words() -> frozenset[str]:
    return _packaged_list("adverb_words.txt")


def normalize_predicate(
    words: Sequence[str],
    aux_words: frozenset[str] | None = None,
    adverb_words: frozenset[str] | None = None,
) -> str:
    """Casefold, drop auxiliaries and adverbs, strip inflection, re-join."""
    if aux_words is None:
        aux_words = default_aux_words()
    if adverb_words is None:
        adverb_words = default_adverb_words()
    kept = []
    for word in words:
        token = word.casefold()
        if token in aux_words or token in adverb_words:
            continue
        kept.append(_strip_suffix(token))
    return " ".join(kept)


@dataclass
class PredicateStats:
    """Occurrence counts of normalized predicate phrases across a corpus."""

    counts: Counter = field(default_factory=Counter)

    def add(self, phrase: str) -> None:
        self.counts[phrase] += 1

    def count(self, phrase: str) -> int:
        return self.counts.get(phrase, 0)

    def merge(self, other: "PredicateStats") -> "PredicateStats":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return PredicateStats(merged)


def count_predicates(
    extractions: Iterable[Extraction],
    aux_words: frozenset[str] | None = None,
    adverb_words: frozenset[str] | None = None,
) -> PredicateStats:
    stats = PredicateStats()
    for ext in extractions:
        stats.add(normalize_predicate([w for _, w in ext.predicate_words], aux_words, adverb_words))
    return stats


def filter_by_frequency(
    extractions: Sequence[Extraction],
    min_count: int,
    aux_words: frozenset[str] | None = None,
    adverb_words: frozenset[str] | None = None,
) -> list[Extraction]:
    """Keep extractions whose normalized predicate occurs >= min_count times.

    Counting and filtering are two passes over the same input, so the result
    is a pure selection and applying the filter twice changes nothing.
    """
    if aux_words is None:
        aux_words = default_aux_words()
    if adverb_words is None:
        adverb_words = default_adverb_words()
    stats = count_predicates(extractions, aux_words, adverb_words)
    kept = []
    for ext in extractions:
        phrase = normalize_predicate(
            [w for _, w in ext.predicate_words], aux_words, adverb_words
        )
        if stats.count(phrase) >= min_count:
            kept.append(ext)
    return kept


def check_contiguity(extraction: Extraction, bundle: SentenceBundle | None = None) -> bool:
    """True iff the predicate occupies consecutive sentence positions.

    Beam candidates may skip words, so this filter is load-bearing.
    An empty predicate is vacuously contiguous.
    """
    if bundle is not None and extraction.sentence_id != bundle.sentence_id:
        raise ValueError(
            f"extraction {extraction.sentence_id!r} does not belong to "
            f"bundle {bundle.sentence_id!r}"
        )
    indices = sorted(extraction.predicate_indices)
    return all(b - a == 1 for a, b in zip(indices, indices[1:]))

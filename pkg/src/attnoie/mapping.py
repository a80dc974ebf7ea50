"""Predicate mapping construction.

A PredicateMapping is a many-to-many dictionary from normalized open
relation phrases to KG predicate identifiers.  Beyond hand-written seed
entries, new pairs are admitted by co-occurrence statistics: whenever an
extracted triple and a KG triple share an argument pair, the (phrase,
predicate) cell is incremented, and pairs whose PMI^2 clears a threshold
join the mapping.

PMI^2(x, y) = ln( p(x,y)^2 / (p(x) p(y)) ), natural log.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Collection, Mapping, Sequence

from .filters import normalize_predicate

PROVENANCE_MANUAL = "manual"
PROVENANCE_BOOTSTRAPPED = "bootstrapped"


class ZeroJoint(Exception):
    pass


class PredicateMapping:
    """Set of (normalized OIE phrase, KG predicate) pairs with provenance."""

    def __init__(self):
        self._entries: dict[tuple[str, str], str] = {}

    def add(self, phrase: str, kg_predicate: str, provenance: str = PROVENANCE_MANUAL) -> None:
        normalized = normalize_predicate(phrase.split())
        key = (normalized, kg_predicate)
        # A manually curated entry always wins over a bootstrapped duplicate.
        if key in self._entries and self._entries[key] == PROVENANCE_MANUAL:
            return
        self._entries[key] = provenance

    def contains(self, phrase: str, kg_predicate: str) -> bool:
        return (phrase, kg_predicate) in self._entries

    def discard(self, phrase: str, kg_predicate: str) -> None:
        self._entries.pop((phrase, kg_predicate), None)

    def entries(self) -> list[tuple[str, str, str]]:
        return sorted(
            (phrase, pred, prov) for (phrase, pred), prov in self._entries.items()
        )

    def phrases_for(self, kg_predicate: str) -> list[str]:
        return sorted(p for (p, k) in self._entries if k == kg_predicate)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._entries

    def copy(self) -> "PredicateMapping":
        clone = PredicateMapping()
        clone._entries = dict(self._entries)
        return clone

    @classmethod
    def from_jsonl(cls, path) -> "PredicateMapping":
        mapping = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    mapping.add(
                        obj["oie_phrase"],
                        obj["kg_predicate"],
                        obj.get("provenance", PROVENANCE_MANUAL),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"{path}:{line_no}: bad mapping record: {exc}") from exc
        return mapping

    def to_jsonl(self, path) -> int:
        count = 0
        with open(path, "w", encoding="utf-8") as fh:
            for phrase, pred, prov in self.entries():
                fh.write(
                    json.dumps(
                        {"kg_predicate": pred, "oie_phrase": phrase, "provenance": prov},
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                )
                fh.write("\n")
                count += 1
        return count


def packaged_seed_mapping() -> PredicateMapping:
    """The in-repo seed mapping for TAC-style predicates."""
    text = resources.files("attnoie.data").joinpath("seed_mapping.jsonl").read_text("utf-8")
    mapping = PredicateMapping()
    for line in text.splitlines():
        line = line.strip()
        if line:
            obj = json.loads(line)
            mapping.add(obj["oie_phrase"], obj["kg_predicate"], obj.get("provenance", PROVENANCE_MANUAL))
    return mapping


def load_reject_list(path) -> set[tuple[str, str]]:
    """Rejected pairs, one 'phrase<TAB>kg_predicate' per line, '#' comments."""
    rejected = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].rstrip("\n").strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{line_no}: expected 'phrase<TAB>kg_predicate'"
                )
            rejected.add((normalize_predicate(parts[0].split()), parts[1].strip()))
    return rejected


@dataclass
class CooccurrenceTable:
    """Joint and marginal counts of (phrase, KG predicate) co-occurrences."""

    joint: Counter = field(default_factory=Counter)
    phrase_marginal: Counter = field(default_factory=Counter)
    predicate_marginal: Counter = field(default_factory=Counter)
    total: int = 0

    def increment(self, phrase: str, kg_predicate: str, by: int = 1) -> None:
        self.joint[(phrase, kg_predicate)] += by
        self.phrase_marginal[phrase] += by
        self.predicate_marginal[kg_predicate] += by
        self.total += by

    def check(self) -> None:
        """Verify marginals are the row/column sums and total is the grand sum."""
        phrase_sums: Counter = Counter()
        pred_sums: Counter = Counter()
        for (phrase, pred), count in self.joint.items():
            phrase_sums[phrase] += count
            pred_sums[pred] += count
        if phrase_sums != +self.phrase_marginal:
            raise AssertionError("phrase marginals do not match joint row sums")
        if pred_sums != +self.predicate_marginal:
            raise AssertionError("predicate marginals do not match joint column sums")
        if sum(self.joint.values()) != self.total:
            raise AssertionError("total does not match the grand sum of the joint")

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.joint)


def accumulate_cooccurrence(
    oie_phrases_by_argpair: Mapping[object, Sequence[str]],
    gold_predicates_by_argpair: Mapping[object, Collection[str]],
) -> CooccurrenceTable:
    """Count (phrase, predicate) co-occurrences over shared argument pairs.

    Each OIE phrase occurrence co-occurring with each KG predicate on the
    same argument pair contributes one count.  Phrases are normalized here.
    """
    table = CooccurrenceTable()
    for key, phrases in oie_phrases_by_argpair.items():
        gold_preds = gold_predicates_by_argpair.get(key)
        if not gold_preds:
            continue
        for phrase in phrases:
            normalized = normalize_predicate(phrase.split())
            for kg_predicate in sorted(set(gold_preds)):
                table.increment(normalized, kg_predicate)
    table.check()
    return table


def pmi2(table: CooccurrenceTable, phrase: str, kg_predicate: str) -> float:
    """ln( p(x,y)^2 / (p(x) p(y)) ) over the table's counts."""
    joint = table.joint.get((phrase, kg_predicate), 0)
    if joint == 0:
        raise ZeroJoint(f"no co-occurrence recorded for ({phrase!r}, {kg_predicate!r})")
    n = table.total
    p_joint = joint / n
    p_phrase = table.phrase_marginal[phrase] / n
    p_pred = table.predicate_marginal[kg_predicate] / n
    return math.log(p_joint * p_joint / (p_phrase * p_pred))


def bootstrap_mapping(
    table: CooccurrenceTable,
    seed_mapping: PredicateMapping,
    pmi_threshold: float = 0.0,
    reject: Collection[tuple[str, str]] | None = None,
) -> PredicateMapping:
    """Seed entries plus every co-occurring pair whose PMI^2 clears the threshold.

    An optional reject list (the manual curation step) is applied last.
    """
    result = seed_mapping.copy()
    for phrase, kg_predicate in table.pairs():
        if pmi2(table, phrase, kg_predicate) >= pmi_threshold:
            result.add(phrase, kg_predicate, PROVENANCE_BOOTSTRAPPED)
    if reject:
        for phrase, kg_predicate in reject:
            result.discard(phrase, kg_predicate)
    return result

"""Matching regimes and corpus metrics.

Three regimes:

* lexical  - a slot is correct when the prediction covers the gold slot's
             syntactic head word (heads must be present in the gold file).
* tuple    - token-overlap credits per slot, penalizing long extractions.
* exact    - argument surfaces and spans must match the gold exactly and the
             (normalized OIE phrase, KG predicate) pair must be in the
             predicate mapping.

Predictions and golds are paired one-to-one per sentence, greedily by
descending pairwise credit.  Precision counts predictions, recall counts
golds; with no predictions precision is 1, with no golds recall is 1.
"""

from __future__ import annotations

import json
import logging
import math
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .filters import normalize_predicate
from .model import Extraction

log = logging.getLogger(__name__)

REGIMES = ("lexical", "tuple", "exact")


class MissingHead(Exception):
    pass


class RegimeFieldMissing(Exception):
    pass


@dataclass(frozen=True)
class GoldTriple:
    """One gold triple; spans and head indices are optional per regime.

    predicate is a surface phrase for standard OIE golds and a KG predicate
    identifier for factual OIE golds.
    """

    sentence_id: str
    arg0_surface: str
    predicate: str
    arg1_surface: str
    arg0_span: tuple[int, int] | None = None
    arg1_span: tuple[int, int] | None = None
    arg0_head: int | None = None
    predicate_head: int | None = None
    arg1_head: int | None = None


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float

    def __post_init__(self):
        for name in ("precision", "recall"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


@dataclass(frozen=True)
class MatchReport:
    """Corpus-level result: matched (pred, gold, credit) pairs plus P/R/F1."""

    matched_pairs: tuple[tuple[int, int, tuple[float, float]], ...]
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _fold(text: str) -> str:
    return unicodedata.normalize("NFC", text).casefold()


def _tokens(text: str) -> list[str]:
    return _fold(text).split()


def lexical_match(pred: Extraction, gold: GoldTriple) -> bool:
    """True iff every predicted slot covers the gold slot's head word index."""
    for name, head in (
        ("arg0", gold.arg0_head),
        ("predicate", gold.predicate_head),
        ("arg1", gold.arg1_head),
    ):
        if head is None:
            raise MissingHead(f"gold triple for {gold.sentence_id!r} lacks {name} head")
    if not pred.arg0.contains(gold.arg0_head):
        return False
    if gold.predicate_head not in pred.predicate_indices:
        return False
    return pred.arg1.contains(gold.arg1_head)


def tuple_match(pred: Extraction, gold: GoldTriple) -> tuple[float, float]:
    """Token-overlap credits (precision_credit, recall_credit), each in [0, 1].

    Per slot the credit is |pred tokens & gold tokens| over the own side's
    token count (multiset intersection, case-folded); the triple credit
    averages the three slots.
    """
    slots = [
        (_tokens(pred.arg0.surface), _tokens(gold.arg0_surface)),
        ([_fold(w) for _, w in pred.predicate_words], _tokens(gold.predicate)),
        (_tokens(pred.arg1.surface), _tokens(gold.arg1_surface)),
    ]
    p_credits = []
    r_credits = []
    for pred_tokens, gold_tokens in slots:
        overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
        if pred_tokens:
            p_credits.append(overlap / len(pred_tokens))
        else:
            p_credits.append(1.0 if not gold_tokens else 0.0)
        if gold_tokens:
            r_credits.append(overlap / len(gold_tokens))
        else:
            r_credits.append(1.0 if not pred_tokens else 0.0)
    return (sum(p_credits) / 3.0, sum(r_credits) / 3.0)


def exact_match(pred: Extraction, gold: GoldTriple, mapping) -> bool:
    """Arguments must match gold surface and span; the predicate pair must be
    present in the mapping.
    """
    if gold.arg0_span is None or gold.arg1_span is None:
        return False
    if (pred.arg0.start, pred.arg0.end) != tuple(gold.arg0_span):
        return False
    if (pred.arg1.start, pred.arg1.end) != tuple(gold.arg1_span):
        return False
    if _fold(pred.arg0.surface) != _fold(gold.arg0_surface):
        return False
    if _fold(pred.arg1.surface) != _fold(gold.arg1_surface):
        return False
    phrase = normalize_predicate([w for _, w in pred.predicate_words])
    return mapping.contains(phrase, gold.predicate)


def _pair_credits(
    preds: Sequence[tuple[int, Extraction]],
    golds: Sequence[tuple[int, GoldTriple]],
    regime: str,
    mapping,
) -> list[tuple[int, int, tuple[float, float]]]:
    """Greedy one-to-one assignment by descending pairwise F1 credit."""
    scored = []
    for pi, pred in preds:
        for gi, gold in golds:
            if regime == "lexical":
                credit = (1.0, 1.0) if lexical_match(pred, gold) else None
            elif regime == "exact":
                credit = (1.0, 1.0) if exact_match(pred, gold, mapping) else None
            else:
                p, r = tuple_match(pred, gold)
                credit = (p, r) if p + r > 0 else None
            if credit is not None:
                scored.append((f1_score(*credit), pi, gi, credit))
    scored.sort(key=lambda row: (-row[0], row[1], row[2]))

    matched: list[tuple[int, int, tuple[float, float]]] = []
    used_preds: set[int] = set()
    used_golds: set[int] = set()
    for _, pi, gi, credit in scored:
        if pi in used_preds or gi in used_golds:
            continue
        used_preds.add(pi)
        used_golds.add(gi)
        matched.append((pi, gi, credit))
    return matched


def _validate_regime(
    preds: Sequence[Extraction], golds: Sequence[GoldTriple], regime: str, mapping
) -> None:
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}, expected one of {REGIMES}")
    if regime == "lexical":
        for gold in golds:
            if None in (gold.arg0_head, gold.predicate_head, gold.arg1_head):
                raise RegimeFieldMissing(
                    f"lexical match needs head indices on every gold triple; "
                    f"missing for sentence {gold.sentence_id!r}"
                )
    if regime == "exact":
        if mapping is None:
            raise RegimeFieldMissing("exact match needs a predicate mapping")
        for gold in golds:
            if gold.arg0_span is None or gold.arg1_span is None:
                raise RegimeFieldMissing(
                    f"exact match needs argument spans on every gold triple; "
                    f"missing for sentence {gold.sentence_id!r}"
                )


def score_corpus(
    preds: Sequence[Extraction],
    golds: Sequence[GoldTriple],
    regime: str,
    mapping=None,
) -> MatchReport:
    """Corpus precision/recall/F1 under one matching regime."""
    _validate_regime(preds, golds, regime, mapping)

    preds_by_sent: dict[str, list[tuple[int, Extraction]]] = defaultdict(list)
    for pi, pred in enumerate(preds):
        preds_by_sent[pred.sentence_id].append((pi, pred))
    golds_by_sent: dict[str, list[tuple[int, GoldTriple]]] = defaultdict(list)
    for gi, gold in enumerate(golds):
        golds_by_sent[gold.sentence_id].append((gi, gold))

    matched: list[tuple[int, int, tuple[float, float]]] = []
    for sent_id in sorted(preds_by_sent):
        if sent_id in golds_by_sent:
            matched.extend(
                _pair_credits(
                    preds_by_sent[sent_id], golds_by_sent[sent_id], regime, mapping
                )
            )

    if regime == "tuple":
        p_sum = sum(credit[0] for _, _, credit in matched)
        r_sum = sum(credit[1] for _, _, credit in matched)
    else:
        p_sum = r_sum = float(len(matched))
    precision = p_sum / len(preds) if preds else 1.0
    recall = r_sum / len(golds) if golds else 1.0
    return MatchReport(
        matched_pairs=tuple(sorted(matched)),
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
    )


def trapezoid_auc(curve: Sequence[PRPoint]) -> float:
    """Trapezoidal area over the recall-sorted curve.

    The curve is closed at recall 0 with the precision of its
    highest-threshold point.
    """
    if not curve:
        return 0.0
    anchor = max(curve, key=lambda pt: pt.threshold)
    by_recall = sorted(curve, key=lambda pt: (pt.recall, -pt.threshold))
    xs = [0.0] + [pt.recall for pt in by_recall]
    ys = [anchor.precision] + [pt.precision for pt in by_recall]
    return sum(
        (x1 - x0) * (y0 + y1) / 2.0 for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])
    )


def auc_and_best_f1(
    preds: Sequence[Extraction],
    golds: Sequence[GoldTriple],
    regime: str,
    mapping=None,
) -> tuple[float, float, list[PRPoint]]:
    """Sweep confidence thresholds over distinct scores.

    AUC is the trapezoidal area over the recall-sorted curve (closed at
    recall 0 with the highest-threshold precision); best F1 is the maximum
    over the curve's points.
    """
    for pred in preds:
        if not math.isfinite(pred.norm_score):
            raise ValueError(f"prediction in {pred.sentence_id!r} has non-finite score")
    if not preds:
        return 0.0, 0.0, []

    thresholds = sorted({p.norm_score for p in preds}, reverse=True)
    curve = []
    for threshold in thresholds:
        surviving = [p for p in preds if p.norm_score >= threshold]
        report = score_corpus(surviving, golds, regime, mapping)
        curve.append(PRPoint(threshold, report.precision, report.recall))

    best = max(pt.f1 for pt in curve)
    return trapezoid_auc(curve), best, curve


def read_gold_tsv(path) -> list[GoldTriple]:
    """Standard-OIE gold: sentence_id, arg0, predicate, arg1, optional heads.

    Rows carrying extra argument columns are truncated to the first two
    arguments; the count is logged once per file.
    """
    golds = []
    truncated = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 4:
                raise ValueError(
                    f"{path}:{line_no}: expected at least 4 tab-separated columns"
                )
            sent_id, arg0, predicate, arg1 = cols[:4]
            rest = cols[4:]
            heads: list[int | None] = [None, None, None]
            if rest:
                if len(rest) >= 3 and all(_is_int(c) for c in rest[-3:]):
                    extra_args = rest[:-3]
                    heads = [int(c) for c in rest[-3:]]
                else:
                    extra_args = rest
                if extra_args:
                    truncated += 1
            golds.append(
                GoldTriple(
                    sentence_id=sent_id,
                    arg0_surface=arg0,
                    predicate=predicate,
                    arg1_surface=arg1,
                    arg0_head=heads[0],
                    predicate_head=heads[1],
                    arg1_head=heads[2],
                )
            )
    if truncated:
        log.warning(
            "%s: %d gold rows carried extra arguments; truncated to (arg0, predicate, arg1)",
            path,
            truncated,
        )
    return golds


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def read_gold_factual_jsonl(path) -> list[GoldTriple]:
    """Factual-OIE gold: JSONL rows with arg spans and a KG predicate id."""
    golds = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                golds.append(
                    GoldTriple(
                        sentence_id=obj["sentence_id"],
                        arg0_surface=obj["arg0"]["surface"],
                        predicate=obj["predicate_id"],
                        arg1_surface=obj["arg1"]["surface"],
                        arg0_span=(obj["arg0"]["start"], obj["arg0"]["end"]),
                        arg1_span=(obj["arg1"]["start"], obj["arg1"]["end"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad gold record: {exc}") from exc
    return golds


def write_gold_factual_jsonl(path, golds: Iterable[GoldTriple]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for gold in golds:
            if gold.arg0_span is None or gold.arg1_span is None:
                raise ValueError("factual gold rows need argument spans")
            obj = {
                "sentence_id": gold.sentence_id,
                "arg0": {
                    "surface": gold.arg0_surface,
                    "start": gold.arg0_span[0],
                    "end": gold.arg0_span[1],
                },
                "predicate_id": gold.predicate,
                "arg1": {
                    "surface": gold.arg1_surface,
                    "start": gold.arg1_span[0],
                    "end": gold.arg1_span[1],
                },
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            count += 1
    return count

"""Command-line pipelines.

Subcommands:

    extract        attention file + bundles -> extractions JSONL
    score          extractions + gold -> report JSON
    build-mapping  extractions + factual gold -> predicate mapping JSONL
    link           bundles + mention dictionary -> linked mentions JSONL
    align          linked mentions + KG triples -> factual gold JSONL
    sample         emit N random JSONL rows for manual review

Every output gets a companion <output>.manifest.json written atomically.
Outputs are deterministic given files and flags; only the manifest carries
timestamps.  Exit codes: 0 success, 1 usage, 2 input format, 3 internal.
Defaults can be overridden with ATTNOIE_* environment variables.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass

from . import __version__
from .attention_io import (
    AttentionFileReader,
    AttentionIOError,
    read_bundles,
    word_matrix_for_bundle,
)
from .beam_search import extract_sentence
from .filters import (
    check_contiguity,
    default_adverb_words,
    default_aux_words,
    filter_by_frequency,
    load_stop_list,
)
from .kg_align import KGStore, LinkedMention, MentionDictionary, align_distant, link_mentions
from .mapping import (
    PredicateMapping,
    accumulate_cooccurrence,
    bootstrap_mapping,
    load_reject_list,
    packaged_seed_mapping,
)
from .metrics import (
    RegimeFieldMissing,
    auc_and_best_f1,
    read_gold_factual_jsonl,
    read_gold_tsv,
    score_corpus,
    write_gold_factual_jsonl,
)
from .model import ChunkSpan, Extraction, ExtractionConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env(name: str, fallback, cast=str):
    raw = os.environ.get(f"ATTNOIE_{name}")
    if raw is None:
        return fallback
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return cast(raw)


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: list[str]
    outputs: list[str]
    tool: str
    version: str
    started_utc: str
    elapsed_seconds: float


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(output_path: str, manifest: RunManifest) -> None:
    _write_atomic(
        f"{output_path}.manifest.json",
        json.dumps(asdict(manifest), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
    )


def extraction_to_json(ext: Extraction) -> dict:
    return {
        "sentence_id": ext.sentence_id,
        "arg0": {"start": ext.arg0.start, "end": ext.arg0.end, "surface": ext.arg0.surface},
        "predicate_words": [[i, w] for i, w in ext.predicate_words],
        "arg1": {"start": ext.arg1.start, "end": ext.arg1.end, "surface": ext.arg1.surface},
        "raw_score": ext.raw_score,
        "norm_score": ext.norm_score,
        "direction": ext.direction,
    }


def extraction_from_json(obj: dict) -> Extraction:
    return Extraction(
        sentence_id=obj["sentence_id"],
        arg0=ChunkSpan(obj["arg0"]["start"], obj["arg0"]["end"], obj["arg0"]["surface"]),
        predicate_words=tuple((i, w) for i, w in obj["predicate_words"]),
        arg1=ChunkSpan(obj["arg1"]["start"], obj["arg1"]["end"], obj["arg1"]["surface"]),
        raw_score=obj["raw_score"],
        norm_score=obj["norm_score"],
        direction=obj["direction"],
    )


def write_extractions(path, extractions) -> int:
    lines = [
        json.dumps(extraction_to_json(e), ensure_ascii=False, sort_keys=True)
        for e in extractions
    ]
    _write_atomic(path, "".join(line + "\n" for line in lines))
    return len(lines)


def read_extractions(path) -> list[Extraction]:
    extractions = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                extractions.append(extraction_from_json(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{line_no}: bad extraction record: {exc}") from exc
    return extractions


def _extract_one(task):
    bundle, matrix, config = task
    return extract_sentence(bundle, matrix, config)


def cmd_extract(args) -> int:
    config = ExtractionConfig(
        beam_size=args.beam_size,
        score_threshold=args.score_threshold,
        min_predicate_frequency=args.min_pred_freq,
        head_reduction=args.head_reduction,
        layer_selection=args.layer,
        bidirectional=args.bidirectional,
        allow_empty_predicate=args.allow_empty_predicate,
        max_gap=args.max_gap,
    )
    aux_words = load_stop_list(args.aux_list) if args.aux_list else default_aux_words()
    adverb_words = (
        load_stop_list(args.adverb_list) if args.adverb_list else default_adverb_words()
    )

    bundles = read_bundles(args.bundles)
    started = time.time()
    tasks = []
    with AttentionFileReader(args.attention) as reader:
        for bundle in bundles:
            matrix = word_matrix_for_bundle(
                reader, bundle, config.layer_selection, config.head_reduction
            )
            tasks.append((bundle, matrix, config))

    if args.jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            per_sentence = list(pool.map(_extract_one, tasks))
    else:
        per_sentence = [_extract_one(task) for task in tasks]

    bundles_by_id = {b.sentence_id: b for b in bundles}
    extractions = [e for batch in per_sentence for e in batch]
    extractions = [
        e for e in extractions if check_contiguity(e, bundles_by_id[e.sentence_id])
    ]
    extractions = filter_by_frequency(
        extractions, config.min_predicate_frequency, aux_words, adverb_words
    )
    extractions.sort(
        key=lambda e: (
            e.sentence_id,
            -e.norm_score,
            e.arg0.start,
            e.arg1.start,
            e.predicate_indices,
        )
    )
    count = write_extractions(args.output, extractions)
    _write_manifest(
        args.output,
        RunManifest(
            command="extract",
            config={
                "beam_size": config.beam_size,
                "score_threshold": config.score_threshold,
                "min_predicate_frequency": config.min_predicate_frequency,
                "head_reduction": config.head_reduction,
                "layer_selection": config.layer_selection,
                "bidirectional": config.bidirectional,
                "allow_empty_predicate": config.allow_empty_predicate,
                "max_gap": config.max_gap,
                "jobs": args.jobs,
            },
            inputs=[args.attention, args.bundles],
            outputs=[args.output],
            tool="attnoie",
            version=__version__,
            started_utc=_utc_now(),
            elapsed_seconds=round(time.time() - started, 6),
        ),
    )
    print(f"wrote {count} extractions to {args.output}", file=sys.stderr)
    return EXIT_OK


def _read_gold_any(path) -> list[GoldTriple]:
    with open(path, "r", encoding="utf-8") as fh:
        head = ""
        for line in fh:
            if line.strip():
                head = line.lstrip()
                break
    if head.startswith("{"):
        return read_gold_factual_jsonl(path)
    return read_gold_tsv(path)


def cmd_score(args) -> int:
    preds = read_extractions(args.predictions)
    golds = _read_gold_any(args.gold)
    mapping = PredicateMapping.from_jsonl(args.mapping) if args.mapping else None
    if args.regime == "exact" and mapping is None:
        raise UsageError("--mapping is required for the exact regime")

    started = time.time()
    report = score_corpus(preds, golds, args.regime, mapping)
    payload = report.to_json()
    if args.auc:
        auc, best_f1, curve = auc_and_best_f1(preds, golds, args.regime, mapping)
        payload["auc"] = auc
        payload["best_f1"] = best_f1
        payload["curve"] = [
            {"threshold": pt.threshold, "precision": pt.precision, "recall": pt.recall}
            for pt in curve
        ]
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if args.output:
        _write_atomic(args.output, text)
        _write_manifest(
            args.output,
            RunManifest(
                command="score",
                config={"regime": args.regime, "auc": bool(args.auc)},
                inputs=[args.predictions, args.gold] + ([args.mapping] if args.mapping else []),
                outputs=[args.output],
                tool="attnoie",
                version=__version__,
                started_utc=_utc_now(),
                elapsed_seconds=round(time.time() - started, 6),
            ),
        )
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build_mapping(args) -> int:
    preds = read_extractions(args.extractions)
    golds = read_gold_factual_jsonl(args.gold)
    seed = (
        PredicateMapping.from_jsonl(args.seed_mapping)
        if args.seed_mapping
        else packaged_seed_mapping()
    )
    reject = load_reject_list(args.reject_list) if args.reject_list else None

    started = time.time()
    oie_by_pair: dict[tuple, list[str]] = {}
    for pred in preds:
        key = (
            pred.sentence_id,
            pred.arg0.start,
            pred.arg0.end,
            pred.arg1.start,
            pred.arg1.end,
        )
        oie_by_pair.setdefault(key, []).append(pred.predicate_text)
    gold_by_pair: dict[tuple, set[str]] = {}
    for gold in golds:
        key = (gold.sentence_id, *gold.arg0_span, *gold.arg1_span)
        gold_by_pair.setdefault(key, set()).add(gold.predicate)

    table = accumulate_cooccurrence(oie_by_pair, gold_by_pair)
    mapping = bootstrap_mapping(table, seed, args.pmi_threshold, reject)
    count = mapping.to_jsonl(args.output)
    _write_manifest(
        args.output,
        RunManifest(
            command="build-mapping",
            config={"pmi_threshold": args.pmi_threshold},
            inputs=[args.extractions, args.gold]
            + ([args.seed_mapping] if args.seed_mapping else [])
            + ([args.reject_list] if args.reject_list else []),
            outputs=[args.output],
            tool="attnoie",
            version=__version__,
            started_utc=_utc_now(),
            elapsed_seconds=round(time.time() - started, 6),
        ),
    )
    print(f"wrote {count} mapping entries to {args.output}", file=sys.stderr)
    return EXIT_OK


def linked_mention_to_json(sentence_id: str, mention: LinkedMention) -> dict:
    return {
        "sentence_id": sentence_id,
        "start": mention.chunk.start,
        "end": mention.chunk.end,
        "surface": mention.chunk.surface,
        "entity_id": mention.entity_id,
        "probability": mention.probability,
    }


def cmd_link(args) -> int:
    bundles = read_bundles(args.bundles)
    dictionary = MentionDictionary.from_tsv(args.dictionary)
    started = time.time()
    lines = []
    for bundle in bundles:
        for mention in link_mentions(bundle, dictionary):
            lines.append(
                json.dumps(
                    linked_mention_to_json(bundle.sentence_id, mention),
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
    _write_atomic(args.output, "".join(line + "\n" for line in lines))
    _write_manifest(
        args.output,
        RunManifest(
            command="link",
            config={},
            inputs=[args.bundles, args.dictionary],
            outputs=[args.output],
            tool="attnoie",
            version=__version__,
            started_utc=_utc_now(),
            elapsed_seconds=round(time.time() - started, 6),
        ),
    )
    print(f"wrote {len(lines)} linked mentions to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_align(args) -> int:
    bundles = read_bundles(args.bundles)
    dictionary = MentionDictionary.from_tsv(args.dictionary)
    kg = KGStore.from_tsv(args.kg)
    started = time.time()
    golds = []
    for bundle in bundles:
        linked = link_mentions(bundle, dictionary)
        golds.extend(align_distant(bundle, linked, kg))
    count = write_gold_factual_jsonl(args.output, golds)
    _write_manifest(
        args.output,
        RunManifest(
            command="align",
            config={},
            inputs=[args.bundles, args.dictionary, args.kg],
            outputs=[args.output],
            tool="attnoie",
            version=__version__,
            started_utc=_utc_now(),
            elapsed_seconds=round(time.time() - started, 6),
        ),
    )
    print(f"wrote {count} gold triples to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_sample(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n") for line in fh if line.strip()]
    rng = random.Random(args.seed)
    picked = rows if len(rows) <= args.n else rng.sample(rows, args.n)
    for row in picked:
        print(row)
    return EXIT_OK


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="attnoie", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"attnoie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run attention-guided extraction over a corpus")
    p.add_argument("--attention", required=True, help="ATN1 attention file")
    p.add_argument("--bundles", required=True, help="sentence bundles JSONL")
    p.add_argument("--output", required=True, help="extractions JSONL to write")
    p.add_argument("--beam-size", type=int, default=_env("BEAM_SIZE", 6, int))
    p.add_argument(
        "--score-threshold", type=float, default=_env("SCORE_THRESHOLD", 0.005, float)
    )
    p.add_argument("--min-pred-freq", type=int, default=_env("MIN_PRED_FREQ", 10, int))
    p.add_argument(
        "--head-reduction",
        choices=("mean", "max"),
        default=_env("HEAD_REDUCTION", "mean"),
    )
    p.add_argument(
        "--layer", choices=("last", "mean_all"), default=_env("LAYER", "last")
    )
    p.add_argument(
        "--bidirectional",
        action=argparse.BooleanOptionalAction,
        default=_env("BIDIRECTIONAL", True, bool),
    )
    p.add_argument("--allow-empty-predicate", action="store_true")
    p.add_argument("--max-gap", type=int, default=_env("MAX_GAP", 30, int))
    p.add_argument("--jobs", type=int, default=_env("JOBS", 1, int))
    p.add_argument("--aux-list", help="auxiliary-word stop list file")
    p.add_argument("--adverb-list", help="adverb stop list file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("score", help="score extractions against a gold file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--regime", required=True, choices=("lexical", "tuple", "exact"))
    p.add_argument("--mapping", help="predicate mapping JSONL (exact regime)")
    p.add_argument("--auc", action="store_true", help="also sweep thresholds for AUC")
    p.add_argument("--output", help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser(
        "build-mapping", help="bootstrap a predicate mapping from co-occurrences"
    )
    p.add_argument("--extractions", required=True)
    p.add_argument("--gold", required=True, help="factual gold JSONL")
    p.add_argument("--seed-mapping", help="seed mapping JSONL (default: packaged)")
    p.add_argument(
        "--pmi-threshold", type=float, default=_env("PMI_THRESHOLD", 0.0, float)
    )
    p.add_argument("--reject-list", help="rejected pairs file")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_build_mapping)

    p = sub.add_parser("link", help="link mentions against a dictionary")
    p.add_argument("--bundles", required=True)
    p.add_argument("--dictionary", required=True, help="mention TSV")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("align", help="distant-supervision alignment to a KG")
    p.add_argument("--bundles", required=True)
    p.add_argument("--dictionary", required=True, help="mention TSV")
    p.add_argument("--kg", required=True, help="KG triples TSV")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("sample", help="emit N random rows from a JSONL file")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        InputError,
        AttentionIOError,
        RegimeFieldMissing,
        FileNotFoundError,
        IsADirectoryError,
        PermissionError,
        UnicodeDecodeError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Exporter command line.

    attnoie-export run --input corpus.txt --model <name-or-path> \
        --attention-out corpus.atn --bundles-out corpus.jsonl
    attnoie-export chunk-only --input corpus.txt --bundles-out corpus.jsonl
"""

from __future__ import annotations

import argparse
import logging
import sys

from .export import ExportJob, ModelLoadError, chunk_only, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnoie-export")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="export attention and bundles from raw text")
    p.add_argument("--input", required=True, help="UTF-8 text file")
    p.add_argument("--model", required=True, help="model name or local path")
    p.add_argument("--attention-out", required=True)
    p.add_argument("--bundles-out", required=True)
    p.add_argument("--layers", choices=("last", "all"), default="last")
    p.add_argument("--max-seq-len", type=int, default=256)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("chunk-only", help="emit bundles without attention")
    p.add_argument("--input", required=True)
    p.add_argument("--bundles-out", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level="INFO")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            job = ExportJob(
                input_path=args.input,
                model=args.model,
                attention_path=args.attention_out,
                bundles_path=args.bundles_out,
                layers=args.layers,
                max_seq_len=args.max_seq_len,
                batch_size=args.batch_size,
            )
            exported, skipped = export(job)
            print(f"exported {exported} sentences ({skipped} skipped)", file=sys.stderr)
        else:
            count = chunk_only(args.input, args.bundles_out)
            print(f"wrote {count} bundles", file=sys.stderr)
    except (ModelLoadError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

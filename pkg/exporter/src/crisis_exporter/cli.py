"""CLI: ``exporter finetune`` and ``exporter export``."""

from __future__ import annotations

import argparse
import sys
import traceback

from crisis_exporter.data import DataError, load_crisisnlp
from crisis_exporter.export import export_bundle
from crisis_exporter.finetune import FinetuneConfig, finetune


def build_parser():
    parser = argparse.ArgumentParser(
        prog="exporter",
        description="Finetune an encoder on crisis tweets and export "
        "embedding/attention bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="train the 9-label classifier")
    p.add_argument("--data", nargs="+", required=True, help="CrisisNLP CSV files")
    p.add_argument("--base-model", default="bert-base-uncased",
                   help="pretrained id/path, or 'tiny-random' for offline smoke runs")
    p.add_argument("--id-col", default="tweet_id")
    p.add_argument("--text-col", default="tweet_text")
    p.add_argument("--label-col", default="label")
    p.add_argument("--split-fraction", type=float, default=0.8)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--max-length", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("export", help="emit an embedding/attention bundle")
    p.add_argument("--tweets", required=True, help="tweets JSONL (id, text)")
    p.add_argument("--checkpoint", default=None,
                   help="finetuned checkpoint dir; omit for the pretrained baseline")
    p.add_argument("--base-model", default="bert-base-uncased")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-length", type=int, default=64)
    p.add_argument("--exclude-special", action="store_true",
                   help="exclude special tokens from mean pooling")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def cmd_finetune(args) -> int:
    rows = load_crisisnlp(
        args.data, id_col=args.id_col, text_col=args.text_col,
        label_col=args.label_col,
    )
    cfg = FinetuneConfig(
        base_model_id=args.base_model,
        split_fraction=args.split_fraction,
        batch_size=args.batch_size,
        epochs=args.epochs,
        max_length=args.max_length,
        seed=args.seed,
    )
    metrics = finetune(rows, cfg, args.out)
    print(
        f"finetune: {metrics['n_train']} train / {metrics['n_val']} val, "
        f"validation accuracy {metrics['validation_accuracy']:.4f}"
    )
    return 0


def cmd_export(args) -> int:
    manifest = export_bundle(
        args.tweets,
        args.out,
        checkpoint=args.checkpoint,
        base_model_id=args.base_model,
        batch_size=args.batch_size,
        max_length=args.max_length,
        include_special=not args.exclude_special,
        seed=args.seed,
    )
    print(
        f"export: {manifest['n_tweets']} tweets, dim {manifest['dim']}, "
        f"source {manifest['source_tag']}"
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()

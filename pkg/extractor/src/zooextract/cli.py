"""Command line entry point."""

import argparse
import sys
from pathlib import Path

from .errors import ExtractError
from .extract import ExtractJob, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zooextract",
        description="Export frozen representations of an image folder as EMB1 splits",
    )
    parser.add_argument("--model", required=True, metavar="REF",
                        help="torchvision model name or path to a TorchScript archive")
    parser.add_argument("--data", required=True, metavar="DIR",
                        help="dataset directory with one subdirectory per class")
    parser.add_argument("--out", required=True, metavar="DIR",
                        help="output directory (embeddings/ and models.csv)")
    parser.add_argument("--train", type=int, default=800, help="total train rows (default 800)")
    parser.add_argument("--val", type=int, default=200, help="total val rows (default 200)")
    parser.add_argument("--weights", metavar="PATH", default=None,
                        help="local state dict for a named model (skips any download)")
    parser.add_argument("--input-size", type=int, default=224,
                        help="square input edge after resize + center crop (default 224)")
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractJob(
        model_ref=args.model,
        data_dir=Path(args.data),
        out_dir=Path(args.out),
        n_train=args.train,
        n_val=args.val,
        weights_path=None if args.weights is None else Path(args.weights),
        input_size=args.input_size,
        batch_size=args.batch_size,
    )
    try:
        result = run(job)
    except ExtractError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    print(
        f"extract: {result.model_id} on {result.task_id}: "
        f"wrote {result.n_train} train + {result.n_val} val rows, d={result.dim}"
    )
    verb = "appended to" if result.row_appended else "already in"
    print(f"manifest: {verb} {result.manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: extract embeddings, benchmark backbones."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .bench import report_efficiency
from .errors import ExtractError
from .extract import extract_to_file
from .recipes import BACKBONE_NAMES, DEFAULT_IMAGE_SIZE

log = logging.getLogger("fsextract")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsextract",
        description="Run a frozen backbone over an image folder tree",
    )
    parser.add_argument("--version", action="version", version=f"fsextract {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="embed a class-per-subdirectory image tree")
    ex.add_argument("--root", required=True, help="directory with one subdirectory per class")
    ex.add_argument("--backbone", required=True, choices=BACKBONE_NAMES)
    ex.add_argument("--image-size", type=int, default=DEFAULT_IMAGE_SIZE)
    ex.add_argument("--out", required=True, help="output embedding file")
    ex.add_argument("--weights", default="imagenet", help="'imagenet' or 'random:SEED'")
    ex.add_argument("--dataset", default="", help="dataset name for metadata (default: root dirname)")
    ex.add_argument("--batch-size", type=int, default=32)
    ex.add_argument("--device", default="cpu")
    ex.add_argument("--fail-fast", action="store_true",
                    help="stop on the first unreadable image instead of skipping it")
    ex.set_defaults(func=cmd_extract)

    be = sub.add_parser("bench", help="report parameters, nominal compute, and latency")
    be.add_argument("--backbone", required=True, choices=BACKBONE_NAMES)
    be.add_argument("--repeats", type=int, default=100)
    be.add_argument("--warmups", type=int, default=10)
    be.add_argument("--image-size", type=int, default=DEFAULT_IMAGE_SIZE)
    be.add_argument("--weights", default="imagenet", help="'imagenet' or 'random:SEED'")
    be.add_argument("--device", default="cpu")
    be.add_argument("--json", action="store_true", dest="as_json")
    be.set_defaults(func=cmd_bench)
    return parser


def cmd_extract(args) -> int:
    ds = extract_to_file(
        args.root,
        args.backbone,
        args.out,
        image_size=args.image_size,
        weights=args.weights,
        batch_size=args.batch_size,
        device=args.device,
        fail_fast=args.fail_fast,
        dataset_name=args.dataset,
    )
    print(
        f"wrote {args.out}: {ds.count} records, {len(ds.class_names)} classes, dim {ds.dim}"
    )
    return 0


def cmd_bench(args) -> int:
    report = report_efficiency(
        args.backbone,
        device=args.device,
        repeats=args.repeats,
        warmups=args.warmups,
        weights=args.weights,
        image_size=args.image_size,
    )
    if args.as_json:
        print(json.dumps({
            "backbone": report.backbone,
            "parameters": report.parameters,
            "parameters_m": round(report.parameters_m, 6),
            "flops_m": report.flops_m,
            "latency_ms": round(report.latency_ms, 4),
            "repeats": report.repeats,
            "warmups": report.warmups,
            "device": report.device,
        }))
    else:
        print(f"backbone: {report.backbone}")
        print(f"parameters: {report.parameters} ({report.parameters_m:.2f} M)")
        print(f"flops: {report.flops_m:.2f} M (nominal)")
        print(
            f"latency: {report.latency_ms:.2f} ms/img "
            f"(median of {report.repeats} after {report.warmups} warmups, {report.device})"
        )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExtractError as exc:
        log.error("error: %s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())

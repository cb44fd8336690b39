"""Command line: extract per-frame features for a class-per-directory tree."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import LAYERS, MODELS, RESIZE_MODES, ExtractorConfig
from .manifest import extract_tree


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenefeat",
        description="Export per-frame CNN activations as feature files plus a manifest.",
    )
    parser.add_argument("--input", required=True, help="dataset root (class subdirectories)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--model", choices=MODELS, default="hybrid")
    parser.add_argument("--layer", choices=LAYERS, default="fc7")
    parser.add_argument("--resize", type=int, default=None, help="input side length override")
    parser.add_argument(
        "--resize-mode", choices=RESIZE_MODES, default="warp", help="warp or center-crop first"
    )
    parser.add_argument("--n-frames", default="all", help="frames per video or 'all'")
    parser.add_argument("--weights", default=None, help="state-dict path for the real model")
    parser.add_argument(
        "--fake",
        action="store_true",
        help="deterministic pseudo-activations from hashed pixels (no weights needed)",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        n_frames = args.n_frames if args.n_frames == "all" else int(args.n_frames)
        config = ExtractorConfig(
            model=args.model,
            layer=args.layer,
            resize=args.resize,
            n_frames=n_frames,
            resize_mode=args.resize_mode,
            fake=args.fake,
            weights=args.weights,
        )
        manifest_path = extract_tree(args.input, args.out, config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {manifest_path}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

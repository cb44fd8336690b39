"""Command-line interface tying the pipeline together.

Subcommands:

* ``synth``               generate a synthetic dataset
* ``aggregate``           compute and store video descriptors
* ``vlad fit/encode``     learn or apply the codebook encoding
* ``train``               fit one-vs-rest models on a whole dataset
* ``evaluate lovo/vote``  leave-one-video-out protocols with reports
* ``experiment frames``   the accuracy-vs-frame-count trial study
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import evaluation, pipeline, serialize, synth, vlad
from .errors import ScenePoolError
from .featfile import write_feature_file, read_feature_file
from .manifest_io import load_manifest, manifest_dir
from .model import FeatureMatrix, validate_manifest
from .report import write_curve_files, write_report_files
from .svm import KERNELS, train_ovr


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenepool",
        description="Video classification by temporal pooling of per-frame features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=synth.SYNTH_MODES, default="variance")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--videos-per-class", type=int, default=10)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("aggregate", help="compute video descriptors")
    _add_descriptor_args(p)
    p.add_argument("--out", required=True, help="descriptor bundle path")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("vlad", help="codebook encoding")
    vsub = p.add_subparsers(dest="vlad_command", required=True)
    pf = vsub.add_parser("fit", help="learn projection and codebook from a dataset")
    pf.add_argument("--manifest", required=True)
    pf.add_argument("--k", type=int, default=32, help="codebook size")
    pf.add_argument("--d-prime", type=int, default=128, help="reduced dimension")
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--n-frames", type=int, default=None, help="training frames per video (default all)")
    pf.add_argument("--raw", action="store_true", help="skip power and L2 normalization")
    pf.add_argument("--out", required=True, help="model bundle path")
    pf.set_defaults(func=_cmd_vlad_fit)
    pe = vsub.add_parser("encode", help="encode one feature file")
    pe.add_argument("--model", required=True)
    pe.add_argument("--features", required=True, help="input feature file")
    pe.add_argument("--out", required=True, help="output feature file with the 1xkD' code")
    pe.set_defaults(func=_cmd_vlad_encode)

    p = sub.add_parser("train", help="train one-vs-rest models on all videos")
    _add_descriptor_args(p)
    p.add_argument("--kernel", choices=KERNELS, default="linear")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--out", required=True, help="model bundle path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluation protocols")
    esub = p.add_subparsers(dest="evaluate_command", required=True)
    pl = esub.add_parser("lovo", help="leave-one-video-out on descriptors")
    _add_descriptor_args(pl)
    pl.add_argument("--kernel", choices=KERNELS + ("both",), default="linear")
    pl.add_argument("--c", type=float, default=1.0)
    pl.add_argument("--report", required=True, help="output prefix for report files")
    pl.set_defaults(func=_cmd_evaluate_lovo)
    pv = esub.add_parser("vote", help="per-frame training with majority voting")
    pv.add_argument("--manifest", required=True)
    pv.add_argument("--n-frames", type=int, default=10)
    pv.add_argument("--kernel", choices=KERNELS, default="linear")
    pv.add_argument("--c", type=float, default=1.0)
    pv.add_argument("--report", required=True, help="output prefix for report files")
    pv.set_defaults(func=_cmd_evaluate_vote)

    p = sub.add_parser("experiment", help="multi-trial studies")
    xsub = p.add_subparsers(dest="experiment_command", required=True)
    px = xsub.add_parser("frames", help="accuracy vs number of random frames")
    px.add_argument("--manifest", required=True)
    px.add_argument("--n-list", default="1,2,3,5,10,15,20,30,40,50,60", help="comma list of frame counts")
    px.add_argument("--trials", type=int, default=18)
    px.add_argument("--seed", type=int, default=0, help="base seed; trial t uses seed+t")
    px.add_argument("--kernel", choices=KERNELS, default="linear")
    px.add_argument("--c", type=float, default=1.0)
    px.add_argument("--out", required=True, help="output prefix for curve files")
    px.set_defaults(func=_cmd_experiment_frames)

    return parser


def _add_descriptor_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True)
    p.add_argument("--measures", default="mean", help="comma list from mean,sd,skew,kurt,max,vlad")
    p.add_argument("--n-frames", type=int, default=None, help="frames per video (default all)")
    p.add_argument("--sampling", choices=pipeline.SAMPLING_MODES, default="linear")
    p.add_argument("--seed", type=int, default=0, help="seed for random sampling")
    p.add_argument("--vlad-model", default=None, help="model bundle for the vlad measure")
    p.add_argument(
        "--block-norm",
        choices=("per_block", "global", "none"),
        default="per_block",
        help="normalization of statistic blocks",
    )


def _parse_measures(text: str) -> tuple[str, ...]:
    from .aggregation import canonical_measures

    return canonical_measures([m.strip() for m in text.split(",") if m.strip()])


def _load_dataset(manifest_path: str):
    manifest = load_manifest(manifest_path)
    base = manifest_dir(manifest_path)
    validate_manifest(manifest, base_dir=base)
    features = pipeline.load_features(manifest, base_dir=base)
    return manifest, features


def _descriptor_config(args, measures) -> dict:
    return {
        "measures": list(measures),
        "n_frames": args.n_frames,
        "sampling": args.sampling,
        "seed": args.seed,
        "block_norm": args.block_norm,
    }


def _compute_descriptors(args):
    measures = _parse_measures(args.measures)
    if args.n_frames is not None and args.n_frames < 2 and any(m in ("skew", "kurt") for m in measures):
        raise ScenePoolError("insufficient frames for higher moments: skew/kurt need --n-frames >= 2")
    vlad_model = None
    if "vlad" in measures:
        if not args.vlad_model:
            raise ScenePoolError("--measures vlad needs --vlad-model")
        vlad_model = serialize.load_vlad_model(args.vlad_model)
    manifest, features = _load_dataset(args.manifest)
    descriptors = pipeline.dataset_descriptors(
        manifest,
        features,
        measures,
        n_frames=args.n_frames,
        sampling=args.sampling,
        seed=args.seed,
        vlad_model=vlad_model,
        block_norm=args.block_norm,
    )
    return manifest, features, descriptors, measures


def _warn_hik_signed(kernel: str, measures) -> None:
    signed = [m for m in measures if m in ("skew", "kurt")]
    if kernel == "hik" and signed:
        print(
            f"warning: histogram intersection with signed blocks ({','.join(signed)}) "
            "is not recommended; prefer mean,sd,max",
            file=sys.stderr,
        )


def _cmd_synth(args) -> int:
    dataset = synth.make_dataset(
        args.mode,
        classes=args.classes,
        videos_per_class=args.videos_per_class,
        frames=args.frames,
        dim=args.dim,
        seed=args.seed,
    )
    manifest_path = synth.write_dataset(dataset, args.out)
    print(f"wrote {len(dataset.manifest.videos)} videos to {manifest_path}")
    return 0


def _cmd_aggregate(args) -> int:
    manifest, _, descriptors, measures = _compute_descriptors(args)
    serialize.save_descriptors(descriptors, args.out, config=_descriptor_config(args, measures))
    length = len(next(iter(descriptors.values())).values)
    print(f"wrote {len(descriptors)} descriptors of length {length} to {args.out}")
    return 0


def _cmd_vlad_fit(args) -> int:
    manifest, features = _load_dataset(args.manifest)
    stacks = []
    for video in manifest.videos:
        sub = pipeline.select_frames(features[video.id], args.n_frames)
        stacks.append(np.asarray(sub.values, dtype=np.float64))
    samples = np.vstack(stacks)
    model = vlad.fit_vlad_model(
        samples,
        k=args.k,
        d_prime=args.d_prime,
        seed=args.seed,
        power_norm=not args.raw,
        l2_norm=not args.raw,
    )
    serialize.save_vlad_model(model, args.out)
    print(
        f"fitted k={model.codebook.k} d'={model.pca.d_prime} on {samples.shape[0]} frames; "
        f"inertia {model.codebook.inertia:.6g}; wrote {args.out}"
    )
    return 0


def _cmd_vlad_encode(args) -> int:
    model = serialize.load_vlad_model(args.model)
    mat = read_feature_file(args.features)
    code = model.encode(mat)
    write_feature_file(args.out, FeatureMatrix(code.values[None, :].astype(np.float32)))
    print(f"encoded {mat.rows} frames into a length-{code.values.size} code at {args.out}")
    return 0


def _cmd_train(args) -> int:
    manifest, _, descriptors, measures = _compute_descriptors(args)
    _warn_hik_signed(args.kernel, measures)
    rows = np.vstack([descriptors[v.id].values for v in manifest.videos])
    labels = np.asarray([v.class_id for v in manifest.videos])
    model = train_ovr(rows, labels, kind=args.kernel, c=args.c, label_space=manifest.label_space)
    serialize.save_ovr_model(model, args.out)
    print(f"trained {len(model.models)} one-vs-rest models; wrote {args.out}")
    return 0


def _cmd_evaluate_lovo(args) -> int:
    manifest, _, descriptors, measures = _compute_descriptors(args)
    kernels = KERNELS if args.kernel == "both" else (args.kernel,)
    for kernel in kernels:
        _warn_hik_signed(kernel, measures)
        report = evaluation.lovo_evaluate(
            manifest,
            descriptors,
            kind=kernel,
            c=args.c,
            config=_descriptor_config(args, measures),
        )
        prefix = args.report if len(kernels) == 1 else f"{args.report}_{kernel}"
        paths = write_report_files(report, prefix)
        print(f"[{kernel}] overall accuracy {report.overall_accuracy:.2f}% ({report.total} videos)")
        print(f"[{kernel}] wrote {', '.join(paths)}")
    return 0


def _cmd_evaluate_vote(args) -> int:
    manifest, features = _load_dataset(args.manifest)
    report = evaluation.lovo_majority_vote(
        manifest, features, kind=args.kernel, c=args.c, n_frames=args.n_frames
    )
    paths = write_report_files(report, args.report)
    print(f"overall accuracy {report.overall_accuracy:.2f}% ({report.total} videos)")
    print(f"wrote {', '.join(paths)}")
    return 0


def _cmd_experiment_frames(args) -> int:
    try:
        n_list = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ScenePoolError(f"bad --n-list: {exc}") from exc
    manifest, features = _load_dataset(args.manifest)
    curve = evaluation.frames_vs_accuracy(
        manifest,
        features,
        n_list,
        trials=args.trials,
        base_seed=args.seed,
        kind=args.kernel,
        c=args.c,
    )
    paths = write_curve_files(curve, args.out)
    for i, n in enumerate(curve.n_values):
        print(
            f"n={n:>3}  mean {curve.mean[i]:6.2f}  min {curve.min[i]:6.2f}  "
            f"max {curve.max[i]:6.2f}  std {curve.std[i]:5.2f}"
        )
    print(f"wrote {', '.join(paths)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ScenePoolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

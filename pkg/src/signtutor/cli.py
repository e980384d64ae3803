"""signtutor command line.

Subcommands: synth, train-gloves, extract, shapes, train, eval, recognize,
serve.  Everything reads/writes the documented JSON/CSV formats, so the
pipeline can be driven end to end from a shell.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .errors import SignTutorError


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (SignTutorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signtutor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--spec", help="SyntheticSpec JSON (defaults to the built-in benchmark spec)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train-gloves", help="train glove color models from snapshots")
    p.add_argument("--snapshots", required=True, help="directory of frames + ground-truth masks")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--bins", default="32x16x16", help="HxSxV histogram bins")
    p.set_defaults(handler=cmd_train_gloves)

    p = sub.add_parser("extract", help="run the vision pipeline on a frame directory")
    p.add_argument("--input", required=True, help="sequence directory (frames + meta.json)")
    p.add_argument("--gloves", required=True, help="glove models JSON")
    p.add_argument("--shapelib", help="template library JSON (enables cluster decisions)")
    p.add_argument("--ranges", help="feature ranges JSON (enables shape features)")
    p.add_argument("--out", required=True, help="output feature CSV")
    p.add_argument("--group", default="combined", choices=["manual", "nonmanual", "combined"])
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("shapes", help="describe and classify a single hand mask")
    p.add_argument("--mask", required=True, help="binary mask image (PNG)")
    p.add_argument("--lib", help="template library JSON")
    p.add_argument("--ranges", help="feature ranges JSON")
    p.set_defaults(handler=cmd_shapes)

    p = sub.add_parser("train", help="train the three model banks + clusters")
    p.add_argument("--data", required=True, help="dataset directory (features.csv [+ catalog.json])")
    p.add_argument("--out", required=True, help="output banks JSON")
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--val-frac", type=float, default=0.2, help="fraction of the training portion")
    p.add_argument("--split", default="by-performance", choices=["by-performance", "by-subject"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--symmetric-clusters", action="store_true")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="evaluate trained banks on the held-out test split")
    p.add_argument("--models", required=True, help="banks JSON from `train`")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument(
        "--mode",
        default="all",
        choices=["all", "manual", "combined", "nonmanual", "fused"],
    )
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("recognize", help="score one attempt against a target sign")
    p.add_argument("--target", required=True)
    p.add_argument("--features", required=True, help="feature CSV with at least one sequence")
    p.add_argument("--models", required=True)
    p.set_defaults(handler=cmd_recognize)

    p = sub.add_parser("serve", help="run the practice HTTP service")
    p.add_argument("--models", required=True)
    p.add_argument("--catalog", help="catalog JSON (defaults to the built-in demo catalog)")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--store", default="attempts.jsonl")
    p.add_argument("--clips", help="directory of reference clips (<sign-id>.mp4)")
    p.add_argument("--config", help="JSON file overriding any of the above")
    p.set_defaults(handler=cmd_serve)
    return parser


def cmd_synth(args) -> int:
    from .synth import SyntheticSpec, default_spec, generate_synthetic, write_dataset

    spec = SyntheticSpec.load(args.spec) if args.spec else default_spec()
    dataset = generate_synthetic(spec)
    write_dataset(dataset, args.out)
    print(f"wrote {len(dataset.sequences)} sequences ({len(dataset.catalog)} classes) to {args.out}")
    return 0


def _load_snapshots(snapdir: Path, side: str):
    from PIL import Image

    pairs = []
    for frame_path in sorted(snapdir.glob("frame_*.png")):
        idx = frame_path.stem.split("_")[1]
        mask_path = snapdir / f"mask_{side}_{idx}.png"
        if not mask_path.exists():
            continue
        frame = np.asarray(Image.open(frame_path).convert("RGB"))
        mask = np.asarray(Image.open(mask_path).convert("L")) > 127
        pairs.append((frame, mask))
    if not pairs:
        raise SignTutorError(f"no frame_*/mask_{side}_* pairs in {snapdir}")
    return pairs


def cmd_train_gloves(args) -> int:
    from .gloves import save_glove_models, train_glove_model

    bins = tuple(int(v) for v in args.bins.split("x"))
    if len(bins) != 3:
        raise SignTutorError("--bins must look like 32x16x16")
    snapdir = Path(args.snapshots)
    left = train_glove_model(_load_snapshots(snapdir, "left"), bins)
    right = train_glove_model(_load_snapshots(snapdir, "right"), bins)
    save_glove_models(args.out, left, right)
    print(
        f"trained glove models (t_low/t_high: left {left.t_low:.3f}/{left.t_high:.3f}, "
        f"right {right.t_low:.3f}/{right.t_high:.3f}) -> {args.out}"
    )
    return 0


def cmd_extract(args) -> int:
    from .features import AssemblyConfig, Group
    from .gloves import load_glove_models
    from .handshape import FeatureRanges, TemplateLibrary
    from .ingest import FeatureRecord, load_sequence, write_feature_file
    from .service import VisionAssets, features_from_frames

    seq = load_sequence(args.input)
    left, right = load_glove_models(args.gloves)
    ranges = None
    if args.ranges:
        ranges = FeatureRanges.from_dict(json.loads(Path(args.ranges).read_text(encoding="utf-8")))
    library = TemplateLibrary.load(args.shapelib) if args.shapelib else None
    assembly = AssemblyConfig(include_shape=ranges is not None, shape_ranges=ranges)
    assets = VisionAssets(left, right, library, ranges, assembly)
    boxes = seq.face_boxes or [None] * len(seq.frames)
    features = features_from_frames(seq.frames, boxes, assets, Group(args.group))
    label = seq.label or "unknown"
    write_feature_file(args.out, [FeatureRecord(Path(args.input).name, label, features)])
    print(f"extracted {len(features)} frames x {features.dim} features -> {args.out}")
    return 0


def cmd_shapes(args) -> int:
    from PIL import Image

    from .handshape import (
        FeatureRanges,
        TemplateLibrary,
        classify_shape,
        cluster_distances,
        extract_features,
        normalize_features,
    )

    mask = np.asarray(Image.open(args.mask).convert("L")) > 127
    vec = extract_features(mask)
    for i, v in enumerate(vec, start=1):
        print(f"f{i:<2d} {v:.6g}")
    if args.lib:
        lib = TemplateLibrary.load(args.lib)
        v = vec
        if args.ranges:
            ranges = FeatureRanges.from_dict(
                json.loads(Path(args.ranges).read_text(encoding="utf-8"))
            )
            v = normalize_features(vec, ranges)
        distances = cluster_distances(v, lib)
        decision = classify_shape(distances, lib, distances=distances)
        if decision.cluster_id is None:
            print(f"decision: unclassified (min distance {distances.min():.3f})")
        else:
            print(f"decision: cluster {decision.cluster_id} (distance {distances.min():.3f})")
    return 0


def _load_dataset(data_dir: str):
    from .ingest import SignCatalog, load_feature_sequences

    data = Path(data_dir)
    if not (data / "features.csv").exists():
        raise SignTutorError(f"no features.csv in {data_dir}")
    records = load_feature_sequences(data / "features.csv")
    catalog = None
    if (data / "catalog.json").exists():
        catalog = SignCatalog.load(data / "catalog.json")
    return records, catalog


def cmd_train(args) -> int:
    from .fusion import extract_clusters, save_banks, split_dataset, train_banks
    from .hmm import TrainConfig

    records, catalog = _load_dataset(args.data)
    if not records:
        raise SignTutorError(f"no sequences in {args.data}")
    subjects = None
    if args.split == "by-subject":
        subjects_path = Path(args.data) / "subjects.json"
        if not subjects_path.exists():
            raise SignTutorError(
                "by-subject split needs a subjects.json (seq_id -> subject) next to features.csv"
            )
        subjects = json.loads(subjects_path.read_text(encoding="utf-8"))
    train, val, test = split_dataset(
        records,
        train_frac=args.train_frac,
        val_frac_of_train=args.val_frac,
        seed=args.seed,
        strategy=args.split,
        subjects=subjects,
    )
    cfg = TrainConfig(n_states=args.states, max_iters=args.iters, rel_tol=args.rel_tol, seed=args.seed)
    banks = train_banks(train, cfg)
    clusters = extract_clusters(banks, val, symmetric=args.symmetric_clusters)
    meta = {
        "split": {
            "seed": args.seed,
            "train_frac": args.train_frac,
            "val_frac_of_train": args.val_frac,
            "strategy": args.split,
            "train_ids": [r.seq_id for r in train],
            "val_ids": [r.seq_id for r in val],
            "test_ids": [r.seq_id for r in test],
        },
        "train_config": dataclasses.asdict(cfg),
    }
    save_banks(args.out, banks, clusters, meta)
    n_multi = sum(1 for c in clusters.clusters.values() if len(c) > 1)
    print(
        f"trained 3x{len(banks.sign_ids)} models on {len(train)} sequences "
        f"({len(val)} validation, {len(test)} held out); "
        f"{n_multi} signs have non-singleton clusters -> {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    from .fusion import evaluate, load_banks, make_decider

    records, catalog = _load_dataset(args.data)
    banks, clusters, meta = load_banks(args.models)
    test_ids = set(meta.get("split", {}).get("test_ids", []))
    test = [r for r in records if r.seq_id in test_ids] if test_ids else records
    if not test:
        raise SignTutorError("no test sequences (dataset/model mismatch?)")
    groups = catalog.groups() if catalog else None

    modes = ["manual", "combined", "fused"] if args.mode == "all" else [args.mode]
    reports = {}
    for mode in modes:
        decider = make_decider(banks, clusters, mode) if mode == "fused" else make_decider(banks, mode=mode)
        reports[mode] = evaluate(decider, test, groups)

    for mode, report in reports.items():
        print(f"== {mode} ==")
        print(report.confusion.render_text())
        line = f"accuracy: {report.accuracy:.3f}"
        if report.within_group_accuracy is not None:
            line += f"   within-group: {report.within_group_accuracy:.3f}"
        print(line)
        print()
    if args.mode == "all":
        ordering = " <= ".join(f"{m}={reports[m].accuracy:.3f}" for m in modes)
        print(f"accuracy ordering: {ordering}")
    if args.report:
        payload = {m: r.to_dict() for m, r in reports.items()}
        Path(args.report).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        print(f"report -> {args.report}")
    return 0


def cmd_recognize(args) -> int:
    from .fusion import load_banks
    from .ingest import load_feature_sequences
    from .service import recognize_attempt

    banks, clusters, _ = load_banks(args.models)
    if clusters is None:
        raise SignTutorError(f"{args.models} carries no cluster map; re-run training")
    records = load_feature_sequences(args.features)
    if not records:
        raise SignTutorError(f"no sequences in {args.features}")
    attempt = recognize_attempt(records[0], args.target, banks, clusters)
    verdict = attempt.verdict
    print(f"{verdict.kind.value}: {verdict.explanation}")
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    config = ServiceConfig(
        banks_path=overrides.get("models", args.models),
        catalog_path=overrides.get("catalog", args.catalog),
        store_path=overrides.get("store", args.store),
        port=int(overrides.get("port", args.port)),
        workers=int(overrides.get("workers", args.workers)),
        clips_dir=overrides.get("clips", args.clips),
        gloves_path=overrides.get("gloves"),
        shapelib_path=overrides.get("shapelib"),
    )
    serve(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands mirror the curation workflow: parse and filter scores, run the
per-record stages, train and evaluate models over exported datasets, and
serve the review UI. Report-producing commands (eval, stats, train) write
delimited output plus rendered figures next to it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from ..evaluation import RunConfig, build_report, duration_statistics
from ..features.matrix import FeatureMatrix, downsample_time, load_dynf
from ..labeling import CLASS_CATEGORIES, FrameLabelSequence, load_dynl
from ..model import (
    ModelConfig,
    TrainConfig,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
    write_history,
)
from ..score import corpus_marking_statistics, score_passes_filter
from .manifest import load_manifest, save_manifest
from .stages import (
    DOWNSAMPLE_PLANS,
    STAGES,
    _FEATURE_FILES,
    artifact_dir,
    export_dataset,
    load_score,
    run_stage,
)

DATA_ROOT_ENV = "VOCALDYN_DATA_ROOT"

_PLAN_BY_TAG = {tag: (kind, factor) for kind, factor, tag in DOWNSAMPLE_PLANS}


def _workspace(args) -> Path:
    if args.workspace:
        return Path(args.workspace)
    return Path(os.environ.get(DATA_ROOT_ENV, "."))


def _stage_command(args, stage: str) -> int:
    workspace = _workspace(args)
    records = load_manifest(args.manifest)
    wanted = set(args.ids) if args.ids else None
    failures = 0
    for record in records:
        if wanted is not None and record.id not in wanted:
            continue
        if wanted is None and record.status == "rejected":
            continue
        try:
            run_stage(record, stage, workspace)
        except Exception as err:  # keep going; report at the end
            failures += 1
            print(f"{record.id}: {err}", file=sys.stderr)
            continue
        save_manifest(args.manifest, records)
        line = f"{record.id}: {record.status}"
        if stage == "align" and record.alignment_score is not None:
            line += f" (alignment score {record.alignment_score:.3f})"
        print(line)
    return 1 if failures else 0


def _cmd_parse(args) -> int:
    for path in args.scores:
        score = load_score(path)
        counts = {part: len(notes) for part, notes in sorted(score.parts.items())}
        print(f"{path}: parts {counts}, {len(score.markings)} dynamics markings")
        if args.out_dir:
            out = Path(args.out_dir) / (Path(path).stem + ".json")
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(score.to_json())
            print(f"  wrote {out}")
    return 0


def _cmd_filter(args) -> int:
    kept = []
    for path in args.scores:
        score = load_score(path)
        verdict = score_passes_filter(score)
        print(f"{path}: {'keep' if verdict else 'drop'}")
        if verdict:
            kept.append(score)
    stats = corpus_marking_statistics(kept)
    total = sum(stats.values())
    print(f"kept {len(kept)}/{len(args.scores)} scores, {total} markings")
    return 0


def _dataset_items(root: Path, tag: str):
    if tag not in _PLAN_BY_TAG:
        raise SystemExit(f"unknown hop tag {tag!r}; expected one of {sorted(_PLAN_BY_TAG)}")
    kind, factor = _PLAN_BY_TAG[tag]
    dirs = sorted(p for p in Path(root).iterdir() if p.is_dir())
    items = []
    for d in dirs:
        feature_file = d / _FEATURE_FILES[kind]
        label_file = d / f"labels_{tag}.dynl"
        if not feature_file.exists() or not label_file.exists():
            continue
        spec = downsample_time(load_dynf(feature_file), factor)
        labels = load_dynl(label_file)
        frames = min(spec.frames, labels.frames)
        if spec.frames != labels.frames:
            # feature and label grids can disagree by one trailing frame
            spec = FeatureMatrix(
                values=spec.values[:frames],
                hop_seconds=spec.hop_seconds,
                kind=spec.kind,
                source_sample_rate=spec.source_sample_rate,
            )
            labels = FrameLabelSequence(
                class_index=labels.class_index[:frames],
                mask=labels.mask[:frames],
                hop_seconds=labels.hop_seconds,
            )
        items.append((spec, labels, d.name))
    if not items:
        raise SystemExit(f"no dataset items with {tag} labels under {root}")
    return kind, items


def _cmd_train(args) -> int:
    kind, items = _dataset_items(Path(args.dataset), args.hop)
    dataset = [(spec, labels) for spec, labels, _ in items]
    model_config = ModelConfig(
        input_bins=dataset[0][0].bins,
        sequence_length=args.seq,
        seed=args.seed,
    )
    train_config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        class_weighting=args.class_weighting,
    )
    params, history = train(dataset, model_config, train_config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out, params)
    write_history(out.with_suffix(".history.jsonl"), history)
    from .plots import save_history_figure

    save_history_figure(history, out.with_suffix(".history.png"))
    final = history[-1] if history else None
    if final:
        print(
            f"trained {args.epochs} epochs on {len(dataset)} items "
            f"({kind}, {args.hop}): loss {final.loss:.4f}, "
            f"masked accuracy {final.masked_accuracy:.3f}"
        )
    print(f"wrote {out}")
    return 0


def _report_csv(report, path: Path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sequence_length", "resolution_ms", "feature", "acc", "acc_pm1", "acc_pm2"])
        for row in json.loads(report.to_json())["rows"]:
            writer.writerow(
                [
                    row["sequence_length"],
                    row["resolution_ms"],
                    row["feature"],
                    f"{row['acc']:.2f}",
                    f"{row['acc_pm1']:.2f}",
                    f"{row['acc_pm2']:.2f}",
                ]
            )


def _cmd_eval(args) -> int:
    params = load_checkpoint(args.model)
    kind, items = _dataset_items(Path(args.dataset), args.hop)
    config = RunConfig(
        feature_kind=kind,
        sequence_length=params.config.sequence_length,
        resolution_ms=float(args.hop[:-2]),
    )
    runs = []
    for spec, labels, name in items:
        if spec.bins != params.config.input_bins:
            raise SystemExit(
                f"{name}: {spec.bins} feature bins but model expects {params.config.input_bins}"
            )
        runs.append((predict(params, spec), labels, config))
    report = build_report(runs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.to_text())
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    _report_csv(report, out_dir / "report.csv")
    from .plots import save_report_figure

    save_report_figure(report, out_dir / "report.png")
    print(report.to_text(), end="")
    print(f"wrote report.txt/.json/.csv/.png under {out_dir}")
    return 0


def _cmd_stats(args) -> int:
    workspace = _workspace(args)
    records = load_manifest(args.manifest)
    labeled = [r for r in records if r.status == "labeled"]
    sequences = [
        load_dynl(artifact_dir(workspace, record.id) / "labels_16ms.dynl")
        for record in labeled
    ]
    by_status: dict[str, int] = {}
    for record in records:
        by_status[record.status] = by_status.get(record.status, 0) + 1
    print(f"{len(records)} records: " + ", ".join(f"{k}={v}" for k, v in sorted(by_status.items())))
    class_seconds = duration_statistics(sequences) if sequences else {c: 0.0 for c in range(10)}
    out_dir = Path(args.out_dir) if args.out_dir else None
    lines = ["class,category,seconds"]
    for cls in sorted(class_seconds):
        name = CLASS_CATEGORIES[cls].value
        print(f"  {name:>5}: {class_seconds[cls]:10.2f} s")
        lines.append(f"{cls},{name},{class_seconds[cls]:.3f}")
    print(f"  total: {sum(class_seconds.values()) / 3600.0:.3f} h labeled")
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "stats.csv").write_text("\n".join(lines) + "\n")
        from .plots import save_class_distribution_figure

        save_class_distribution_figure(class_seconds, out_dir / "stats.png")
        print(f"wrote stats.csv/.png under {out_dir}")
    return 0


def _cmd_export(args) -> int:
    workspace = _workspace(args)
    records = load_manifest(args.manifest)
    summary = export_dataset(records, workspace, args.out)
    print(
        f"exported {summary['performances']} performances "
        f"({summary['total_hours']:.4f} h labeled) to {args.out}"
    )
    return 0


def _cmd_review(args) -> int:
    if args.review_cmd != "serve":
        raise SystemExit("usage: vocaldyn review serve --bind HOST:PORT --manifest PATH")
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise SystemExit(f"--bind must look like HOST:PORT, got {args.bind!r}")
    from .service import serve_review

    serve_review(
        args.manifest,
        _workspace(args),
        host=host,
        port=int(port),
        static_dir=args.static,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vocaldyn",
        description="Curate dynamics-annotated singing datasets and train "
        "frame-wise dynamics estimators.",
    )
    parser.add_argument(
        "--workspace",
        help=f"data root holding stems/scores/artifacts (default ${DATA_ROOT_ENV} or .)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse scores and report note/marking counts")
    p.add_argument("scores", nargs="+")
    p.add_argument("--out-dir", help="also write canonical score JSON here")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("filter", help="apply the corpus filter to score files")
    p.add_argument("scores", nargs="+")
    p.set_defaults(func=_cmd_filter)

    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage over the manifest")
        p.add_argument("--manifest", required=True)
        p.add_argument("--ids", nargs="*", help="only these record ids")
        p.set_defaults(func=lambda a, s=stage: _stage_command(a, s))

    p = sub.add_parser("train", help="train a dynamics estimator on an exported dataset")
    p.add_argument("--dataset", required=True, help="directory from `vocaldyn export`")
    p.add_argument("--out", required=True, help="checkpoint file to write")
    p.add_argument("--hop", default="16ms", choices=sorted(_PLAN_BY_TAG))
    p.add_argument("--seq", type=int, default=4096)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=0.002)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-weighting", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint and write the results table")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--hop", default="16ms", choices=sorted(_PLAN_BY_TAG))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("stats", help="label duration per class across labeled records")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", help="write stats.csv and stats.png here")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("export", help="bundle labeled records into a dataset directory")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("review", help="review service commands")
    rsub = p.add_subparsers(dest="review_cmd", required=True)
    serve = rsub.add_parser("serve", help="serve the review API and UI")
    serve.add_argument("--bind", default="127.0.0.1:8000")
    serve.add_argument("--manifest", required=True)
    serve.add_argument("--static", help="directory of built UI assets")
    serve.set_defaults(func=_cmd_review)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

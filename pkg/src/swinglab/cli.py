"""Command-line interface: the full pipeline as reproducible subcommands.

Exit codes: 0 success, 1 I/O failure, 2 input validation failure,
3 numeric failure (divergence or singular system). Every run that trains
or splits takes a --seed (default 42) and echoes it; all randomness flows
from that one seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import errors
from .evaluation import (
    DEFAULT_TRUTHS,
    BenchmarkResult,
    benchmark_features,
    correlation_table,
    generate_synthetic,
)
from .features import (
    FeatureVector,
    LabelPolicy,
    Standardizer,
    assemble,
    default_schema,
    label_direction,
    label_spin,
    load_schema,
    read_feature_csv,
    write_feature_csv,
)
from .feedback import (
    compare_sessions,
    extract_curves,
    export_curves_csv,
    generate_feedback,
    optimal_value,
    render_curve_svg,
    MAXIMIZE_OUTPUT,
    MAXIMIZE_STRAIGHT,
    default_density_floor,
)
from .metrics import compute_all
from .models import (
    AdditiveModel,
    Task,
    TrainingConfig,
    load_model,
    save_model,
    train_linear,
    train_nam,
)
from .pose_io import (
    BallRecord,
    ClubType,
    View,
    mirror_sequence,
    normalize_sequence,
    pair_records,
    parse_ball_csv,
    parse_keypoint_file,
    write_ball_csv,
)

logger = logging.getLogger("swinglab")

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (errors.NonFiniteLoss, errors.SingularSystem)


def _policy_from_args(args) -> LabelPolicy:
    return LabelPolicy(
        direction_threshold=args.dir_threshold, spin_threshold=args.spin_threshold
    )


def _config_from_args(args, seed: int) -> TrainingConfig:
    return TrainingConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        l2_penalty=args.l2_penalty,
        output_penalty=args.output_penalty,
        seed=seed,
        hidden_sizes=tuple(int(h) for h in args.hidden_sizes.split(",")),
    )


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dir-threshold", type=float, default=6.0,
                   help="straight-direction threshold in degrees (default 6)")
    p.add_argument("--spin-threshold", type=float, default=10.0,
                   help="straight-spin threshold in degrees (default 10)")


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    defaults = TrainingConfig()
    p.add_argument("--learning-rate", type=float, default=defaults.learning_rate)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--batch-size", type=int, default=defaults.batch_size)
    p.add_argument("--l2-penalty", type=float, default=defaults.l2_penalty)
    p.add_argument("--output-penalty", type=float, default=defaults.output_penalty)
    p.add_argument("--hidden-sizes", type=str,
                   default=",".join(str(h) for h in defaults.hidden_sizes),
                   help="comma-separated subnet layer widths (default 64,32)")


def _load_features_and_balls(
    features_path: str, balls_path: str
) -> tuple[np.ndarray, list[str], list[BallRecord], list[str]]:
    """Join a feature CSV with a ball CSV by swing_id, keeping file order."""
    vectors, names = read_feature_csv(features_path)
    balls = parse_ball_csv(balls_path)
    by_id = {b.swing_id: b for b in balls}
    rows, matched = [], []
    dropped = 0
    for fv in vectors:
        ball = by_id.get(fv.swing_id)
        if ball is None:
            dropped += 1
            continue
        rows.append(fv.values)
        matched.append(ball)
    if dropped:
        logger.warning("%d feature rows had no ball record and were dropped", dropped)
    if not rows:
        raise errors.EmptyDataset("no swings with both features and ball records")
    return np.stack(rows), names, matched, [b.swing_id for b in matched]


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_extract(args) -> int:
    view = View(args.view)
    sequences = parse_keypoint_file(args.keypoints, min_confidence=args.min_confidence)
    if args.mirror:
        sequences = [mirror_sequence(s) for s in sequences]
    in_view = [s for s in sequences if s.view is view]
    skipped_view = len(sequences) - len(in_view)
    if skipped_view:
        logger.warning("skipped %d sequences not in view %s", skipped_view, view.value)

    schema = load_schema(args.schema, view) if args.schema else default_schema(view)
    vectors = []
    metric_rows = []
    for seq in in_view:
        norm = normalize_sequence(seq)
        values = compute_all(norm)
        vectors.append(assemble(values, schema, seq.swing_id))
        for mv in values:
            metric_rows.append(
                [seq.swing_id, view.value, int(mv.event), mv.metric.display, repr(mv.value)]
            )

    extra = None
    if args.balls is not None:
        extra = {"direction_angle": {}, "spin_axis": {}, "ball_speed": {}}
        try:
            balls = parse_ball_csv(args.balls)
        except OSError:
            print(f"warning: ball file {args.balls!r} unreadable; "
                  "pairing columns left empty", file=sys.stderr)
            balls = []
        pairs, unmatched = pair_records(in_view, balls)
        if unmatched:
            print(f"warning: {len(unmatched)} unmatched swing ids: "
                  f"{sorted(unmatched)[:8]}{'...' if len(unmatched) > 8 else ''}",
                  file=sys.stderr)
        for pair in pairs:
            b = pair.ball
            extra["direction_angle"][b.swing_id] = repr(b.direction_angle)
            extra["spin_axis"][b.swing_id] = repr(b.spin_axis)
            extra["ball_speed"][b.swing_id] = repr(b.ball_speed)

    write_feature_csv(args.out_features, vectors, schema.names, extra)
    if args.out_metrics:
        with open(args.out_metrics, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["swing_id", "view", "event_index", "metric", "value"])
            writer.writerows(metric_rows)
    print(
        f"extracted {len(vectors)} swings ({view.value}), "
        f"{len(schema)} features each -> {args.out_features}"
    )
    return EXIT_OK


def _print_benchmark_table(result: BenchmarkResult) -> None:
    print(f"{'target':<10} {'model':<8} {'acc':>8} {'auc':>8} {'mse':>10}")
    for r in result.reports:
        acc = f"{r.accuracy:.4f}" if r.accuracy is not None else "-"
        auc_s = f"{r.auc:.4f}" if r.auc is not None else "-"
        mse_s = f"{r.mse:.4f}" if r.mse is not None else "-"
        print(f"{r.task:<10} {r.model:<8} {acc:>8} {auc_s:>8} {mse_s:>10}")
    for s in result.skipped:
        print(f"{s['task']:<10} {s['model']:<8} skipped: {s['reason']}")


def cmd_benchmark(args) -> int:
    x, names, balls, _ = _load_features_and_balls(args.features, args.balls)
    policy = _policy_from_args(args)
    config = _config_from_args(args, args.seed)
    print(f"seed: {args.seed}")
    result = benchmark_features(
        x, names, balls,
        policy=policy,
        linear_config=config,
        nam_config=config,
        seed=args.seed,
        train_fraction=args.train_fraction,
    )
    _print_benchmark_table(result)
    if args.correlations:
        speeds = [b.ball_speed for b in balls]
        table = correlation_table(x, names, speeds)
        print(f"\n{'feature':<28} {'pearson_r_ball_speed':>20}")
        for name, r in table:
            print(f"{name:<28} {('undefined' if r is None else f'{r:+.4f}'):>20}")
    if args.out:
        payload = {"seed": args.seed, **result.to_dict()}
        Path(args.out).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"report written to {args.out}")
    return EXIT_OK


def _target_task(target: str) -> Task:
    return Task.REGRESSION if target == "speed" else Task.BINARY


def _target_vector(balls: list[BallRecord], target: str, policy: LabelPolicy) -> np.ndarray:
    if target == "direction":
        return np.array([float(label_direction(b.direction_angle, policy)) for b in balls])
    if target == "spin":
        return np.array([float(label_spin(b.spin_axis, policy)) for b in balls])
    return np.array([b.ball_speed for b in balls])


def cmd_train(args) -> int:
    x, names, balls, _ = _load_features_and_balls(args.features, args.balls)
    policy = _policy_from_args(args)
    y = _target_vector(balls, args.target, policy)
    task = _target_task(args.target)
    config = _config_from_args(args, args.seed)
    standardizer = Standardizer.fit(x)
    print(f"seed: {args.seed}")
    trainer = train_nam if args.model == "nam" else train_linear
    model = trainer(x, y, task, config, standardizer=standardizer, feature_names=names)
    save_model(model, args.out)
    print(f"trained {args.model} model for target '{args.target}' "
          f"on {x.shape[0]} swings -> {args.out}")
    return EXIT_OK


def cmd_explain(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, AdditiveModel):
        raise errors.InvariantViolation("explain requires an additive model file")
    vectors, names = read_feature_csv(args.features)
    x = np.stack([fv.values for fv in vectors])
    curves = extract_curves(model, x, grid_size=args.grid_size)
    target = args.target or ("speed" if model.task is Task.REGRESSION else "direction")
    objective = MAXIMIZE_OUTPUT if target == "speed" else MAXIMIZE_STRAIGHT

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for curve in curves:
        try:
            marker = optimal_value(curve, objective, default_density_floor(curve))
        except errors.NoFeasibleRegion:
            marker = None
        svg = render_curve_svg(curve, optimal_marker=marker)
        (out_dir / f"{target}_{curve.feature}.svg").write_text(svg, encoding="utf-8")
    export_curves_csv(curves, str(out_dir / "curves.csv"))
    print(f"wrote {len(curves)} shape-function SVGs and curves.csv to {out_dir}")
    return EXIT_OK


def cmd_feedback(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, AdditiveModel):
        raise errors.InvariantViolation("feedback requires an additive model file")
    train_vectors, _ = read_feature_csv(args.train_features)
    x_train = np.stack([fv.values for fv in train_vectors])
    swing_vectors, _ = read_feature_csv(args.swings)
    swings = np.stack([fv.values for fv in swing_vectors])
    curves = extract_curves(model, x_train, grid_size=args.grid_size)
    report = generate_feedback(
        model,
        curves,
        swings,
        target=args.target,
        golfer_id=args.golfer_id,
        k=args.top_k,
        density_floor=args.density_floor,
    )
    print(f"feedback for golfer {report.golfer_id or '(unnamed)'}, "
          f"target {report.target}, {report.n_swings} swings:")
    for item in report.items:
        print(f"  {item.rank}. {item.direction_text} "
              f"(expected effect {item.effect_delta:+.4f})")
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def cmd_compare(args) -> int:
    before_balls = parse_ball_csv(args.before_balls)
    after_balls = parse_ball_csv(args.after_balls)
    before_vectors, names = read_feature_csv(args.before_features)
    after_vectors, _ = read_feature_csv(args.after_features)
    comparison = compare_sessions(
        before_balls,
        np.stack([fv.values for fv in before_vectors]),
        after_balls,
        np.stack([fv.values for fv in after_vectors]),
        names,
    )
    print(f"sessions: {comparison.n_before} swings before, {comparison.n_after} after")
    print(f"lr_distance_out std: {comparison.before_lr_std:.3f} -> "
          f"{comparison.after_lr_std:.3f}")
    print(f"mean |direction_angle|: {comparison.before_mean_abs_direction:.3f} -> "
          f"{comparison.after_mean_abs_direction:.3f}")
    shifts = sorted(
        zip(names, comparison.mean_shifts), key=lambda p: -abs(p[1])
    )[:10]
    for name, shift in shifts:
        print(f"  {name}: shift {shift:+.4f}")
    if args.out:
        Path(args.out).write_text(
            json.dumps(comparison.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def cmd_synth(args) -> int:
    print(f"seed: {args.seed}")
    data = generate_synthetic(args.seed, args.n, DEFAULT_TRUTHS, noise_std=args.noise_std)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ids = [f"syn{i:05d}" for i in range(args.n)]
    vectors = [FeatureVector(sid, row) for sid, row in zip(ids, data.features)]
    write_feature_csv(str(out_dir / "features.csv"), vectors, list(data.feature_names))

    # Ball records derived from the additive truth: speed is the regression
    # target on a launch-monitor-like scale; direction/spin spread the
    # noiseless score so both straight and non-straight shots exist.
    s = data.noiseless
    center = float(np.median(s))
    spread = float(np.median(np.abs(s - center))) or 1.0
    rng = np.random.default_rng(args.seed + 1)
    clubs = rng.choice([c.value for c in ClubType], size=args.n)
    records = []
    for i in range(args.n):
        speed = 150.0 + float(data.y_regression[i])
        direction = 6.0 * (float(s[i]) - center) / spread
        spin = 10.0 * (float(s[i]) - center) / spread
        dist = speed * 1.8
        records.append(
            BallRecord(
                swing_id=ids[i],
                club_type=ClubType(clubs[i]),
                distance=dist,
                carry=dist * 0.95,
                lr_distance_out=dist * math.tan(math.radians(direction)) / 10.0,
                direction_angle=direction,
                spin_axis=spin,
                ball_speed=speed,
            )
        )
    write_ball_csv(str(out_dir / "balls.csv"), records)

    truth = {
        "seed": args.seed,
        "n": args.n,
        "noise_std": args.noise_std,
        "bias": data.bias,
        "functions": [t.to_dict() for t in data.truths],
    }
    (out_dir / "truth.json").write_text(
        json.dumps(truth, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote features.csv, balls.csv, truth.json to {out_dir}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser and entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swinglab",
        description="Golf swing analytics: features, interpretable models, feedback.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="keypoints -> metric dump + feature CSV")
    p.add_argument("--keypoints", required=True, help="keypoint JSON file")
    p.add_argument("--balls", help="optional ball CSV to pair in")
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-metrics", help="optional per-metric dump CSV")
    p.add_argument("--schema", help="JSON schema override file")
    p.add_argument("--view", choices=[v.value for v in View], default="FACEON")
    p.add_argument("--mirror", action="store_true",
                   help="reflect x and swap L/R joints (left-handed golfer)")
    p.add_argument("--min-confidence", type=float, default=0.0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("benchmark", help="train and score LR + NAM on all targets")
    p.add_argument("--features", required=True)
    p.add_argument("--balls", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out", help="machine-readable JSON report")
    p.add_argument("--correlations", action="store_true",
                   help="also print per-feature Pearson r against ball speed")
    _add_policy_flags(p)
    _add_training_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("train", help="train one model and save it")
    p.add_argument("--features", required=True)
    p.add_argument("--balls", required=True)
    p.add_argument("--target", choices=["direction", "spin", "speed"], required=True)
    p.add_argument("--model", choices=["linear", "nam"], default="nam")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    _add_policy_flags(p)
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="render shape-function SVGs for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="training feature CSV")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--grid-size", type=int, default=64)
    p.add_argument("--target", choices=["direction", "spin", "speed"])
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("feedback", help="ranked per-feature advice for one golfer")
    p.add_argument("--model", required=True)
    p.add_argument("--train-features", required=True)
    p.add_argument("--swings", required=True, help="the golfer's feature CSV")
    p.add_argument("--target", choices=["direction", "spin", "speed"], required=True)
    p.add_argument("--golfer-id", default="")
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--density-floor", type=float, default=None,
                   help="absolute bin-count floor (default: 1%% of train)")
    p.add_argument("--grid-size", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("compare", help="before/after session statistics")
    p.add_argument("--before-balls", required=True)
    p.add_argument("--after-balls", required=True)
    p.add_argument("--before-features", required=True)
    p.add_argument("--after-features", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known truth")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except errors.SwingLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

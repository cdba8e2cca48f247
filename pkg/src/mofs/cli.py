"""Command-line interface.

Subcommands:
  run        execute a configured search experiment (or any algorithm)
  baseline   run a classic baseline over its k grid
  report     aggregate run directories into a comparison table (+ figure)
  project    export pairwise metric projections of archives (+ figure)
  demo-data  write a small synthetic train/test CSV pair and config
"""

import argparse
import json
import sys
from pathlib import Path

from . import baselines, moea, synth
from .errors import MofsError
from .experiment import (
    ExperimentConfig,
    build_stat_rows,
    export_projection,
    export_table,
    load_archive_csv,
    read_run_dir,
    run_experiment,
    select_solution,
)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--preset", choices=("desk", "paper"),
                        help="profile applied before config file and flags")
    parser.add_argument("--dataset", help="built-in dataset name (nslkdd, unswnb15)")
    parser.add_argument("--train", dest="train_path", help="training CSV path")
    parser.add_argument("--test", dest="test_path", help="test CSV path")
    parser.add_argument("--classifier", choices=("cart", "logreg", "forest"))
    parser.add_argument("--pop", type=int, help="population size")
    parser.add_argument("--gens", type=int, help="generation count")
    parser.add_argument("--pc", type=float, help="crossover probability")
    parser.add_argument("--pm", type=float, help="per-individual mutation probability")
    parser.add_argument("--repeats", type=int, help="independent repeats")
    parser.add_argument("--seed", type=int, dest="master_seed", help="master seed")
    parser.add_argument("--subsample", type=int, dest="subsample_train",
                        help="stratified training-row cap")
    parser.add_argument("--subsample-test", type=int, dest="subsample_test",
                        help="stratified test-row cap")
    parser.add_argument("--no-stratified", action="store_true",
                        help="subsample uniformly instead of per class")
    parser.add_argument("--validation-fraction", type=float, dest="validation_fraction")
    parser.add_argument("--workers", type=int, help="parallel evaluation workers")
    parser.add_argument("--out", dest="out_dir", help="output directory")


def _collect_overrides(args: argparse.Namespace, extra: dict | None = None) -> dict:
    keys = ("dataset", "train_path", "test_path", "classifier", "pop", "gens",
            "pc", "pm", "repeats", "master_seed", "subsample_train",
            "subsample_test", "validation_fraction", "workers", "out_dir")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "no_stratified", False):
        overrides["stratified"] = False
    if extra:
        overrides.update(extra)
    return overrides


def _build_config(args: argparse.Namespace, extra: dict | None = None) -> ExperimentConfig:
    overrides = _collect_overrides(args, extra)
    if args.config:
        return ExperimentConfig.from_file(args.config, preset=args.preset,
                                          overrides=overrides)
    return ExperimentConfig.build(preset=args.preset, overrides=overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    extra = {}
    if args.algorithm:
        extra["algorithm"] = args.algorithm
    if args.formulation:
        extra["formulation"] = args.formulation
    cfg = _build_config(args, extra)
    result = run_experiment(cfg)
    print(f"{result.label}: {cfg.repeats} repeat(s) finished")
    for run in result.runs:
        pick = select_solution(run.rows)
        print(f"  repeat {run.repeat_index}: archive {len(run.rows)} member(s), "
              f"selected size={pick.size} "
              f"acc={pick.test.accuracy:.4f} dr={pick.test.detection_rate:.4f} "
              f"[{run.wall_seconds:.1f}s]")
    print(f"  no-selection reference: acc={result.basic.accuracy:.4f} "
          f"dr={result.basic.detection_rate:.4f} size={result.basic.subset_size}")
    if cfg.out_dir:
        print(f"  results written to {cfg.out_dir}")
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    extra = {"algorithm": args.method}
    if args.k_grid:
        extra["k_grid"] = tuple(int(k) for k in args.k_grid.split(","))
    cfg = _build_config(args, extra)
    result = run_experiment(cfg)
    print(f"{result.label}: grid done")
    for run in result.runs:
        grid = run.grid
        for warning in grid.warnings:
            print(f"  warning: {warning}", file=sys.stderr)
        best = grid.best
        print(f"  repeat {run.repeat_index}: best k={best.k} "
              f"acc={best.test.accuracy:.4f} dr={best.test.detection_rate:.4f}")
    if result.label == "pca":
        print("  note: for pca, size counts retained components, not original features")
    if cfg.out_dir:
        print(f"  results written to {cfg.out_dir}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    samples = []
    repeats_seen = set()
    for run_dir in args.inputs:
        method_samples, _ = read_run_dir(run_dir)
        samples.append(method_samples)
        repeats_seen.add(len(method_samples.sizes))
    primary = args.primary or samples[0].label
    rows = build_stat_rows(samples, primary, alpha=args.alpha)
    csv_path, txt_path = export_table(rows, args.out,
                                      single_repeat=1 in repeats_seen)
    print(Path(txt_path).read_text(encoding="utf-8"), end="")
    print(f"report written to {csv_path} and {txt_path}")
    if not args.no_figures:
        from .figures import save_report_figure

        figure_path = str(Path(args.out) / "report.png")
        save_report_figure(rows, figure_path)
        print(f"figure written to {figure_path}")
    return 0


def _load_archives(inputs: list[str]) -> dict[str, list]:
    archives: dict[str, list] = {}
    for run_dir in inputs:
        _, echo = read_run_dir(run_dir)
        label = echo.get("label", Path(run_dir).name)
        if label in archives:
            suffix = 2
            while f"{label}#{suffix}" in archives:
                suffix += 1
            label = f"{label}#{suffix}"
        rows = []
        for archive_path in sorted(Path(run_dir).glob("repeat_*/archive.csv")):
            rows.extend(load_archive_csv(archive_path))
        archives[label] = rows
    return archives


def _cmd_project(args: argparse.Namespace) -> int:
    archives = _load_archives(args.inputs)
    paths = export_projection(archives, args.out)
    for path in paths:
        print(f"projection written to {path}")
    if not args.no_figures:
        from .figures import save_projection_figure

        figure_path = str(Path(args.out) / "projection.png")
        save_projection_figure(archives, figure_path)
        print(f"figure written to {figure_path}")
    return 0


def _cmd_demo_data(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = synth.two_signal_pair(args.train_rows, args.test_rows,
                                        args.noise_features, args.seed,
                                        args.label_noise)
    spec = synth.write_demo_csv(train, str(out / "train.csv"),
                                categorical=args.categorical)
    synth.write_demo_csv(test, str(out / "test.csv"), categorical=args.categorical)
    config = {
        "dataset": {
            "name": spec.name,
            "feature_count": spec.feature_count,
            "label_column": spec.label_column,
            "categorical_columns": list(spec.categorical_columns),
            "ignored_columns": list(spec.ignored_columns),
            "has_header": spec.has_header,
            "normal_labels": sorted(spec.normal_labels),
            "attack_labels": sorted(spec.attack_labels),
        },
        "train_path": str(out / "train.csv"),
        "test_path": str(out / "test.csv"),
    }
    config_path = out / "demo_config.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"demo data written to {out} (config: {config_path})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mofs",
        description="Multi-objective evolutionary feature selection for "
                    "network intrusion detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a configured experiment")
    run_p.add_argument("--algorithm",
                       choices=moea.ALGORITHMS + baselines.BASELINE_METHODS)
    run_p.add_argument("--formulation", choices=("dr3", "acc2", "f12", "acc1"))
    _add_experiment_flags(run_p)
    run_p.set_defaults(handler=_cmd_run)

    base_p = sub.add_parser("baseline", help="run a classic baseline over its k grid")
    base_p.add_argument("--method", required=True, choices=baselines.BASELINE_METHODS)
    base_p.add_argument("--k-grid", help="comma-separated subset sizes "
                                         "(default 5,10,15,20,25)")
    _add_experiment_flags(base_p)
    base_p.set_defaults(handler=_cmd_baseline)

    report_p = sub.add_parser("report", help="aggregate runs into a comparison table")
    report_p.add_argument("--inputs", nargs="+", required=True,
                          help="experiment output directories")
    report_p.add_argument("--primary", help="primary method label "
                                            "(default: label of the first input)")
    report_p.add_argument("--alpha", type=float, default=0.05)
    report_p.add_argument("--out", required=True, help="report output directory")
    report_p.add_argument("--no-figures", action="store_true")
    report_p.set_defaults(handler=_cmd_report)

    project_p = sub.add_parser("project", help="export pairwise metric projections")
    project_p.add_argument("--inputs", nargs="+", required=True)
    project_p.add_argument("--out", required=True)
    project_p.add_argument("--no-figures", action="store_true")
    project_p.set_defaults(handler=_cmd_project)

    demo_p = sub.add_parser("demo-data", help="write synthetic train/test CSVs")
    demo_p.add_argument("--out", required=True)
    demo_p.add_argument("--train-rows", type=int, default=2000)
    demo_p.add_argument("--test-rows", type=int, default=2000)
    demo_p.add_argument("--noise-features", type=int, default=10)
    demo_p.add_argument("--seed", type=int, default=7)
    demo_p.add_argument("--label-noise", type=float, default=0.02)
    demo_p.add_argument("--categorical", action="store_true",
                        help="bucket one column into category strings")
    demo_p.set_defaults(handler=_cmd_demo_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except MofsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Experiment orchestration: configuration, repeated seeded runs, selection of
reported solutions, Welch statistics, and delimited exports.

Seeds derive hierarchically from the master seed: repeat r of the search uses
(master_seed, r), classifier seeds and data splits use reserved tag slots so
no stream is ever shared between two purposes.  Test metrics are computed only
after a search finishes, with the classifier refit on the full training table.
"""

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from . import baselines, classifiers, metrics, moea
from .dataset import (
    BUILTIN_SPECS,
    DatasetSpec,
    FeatureTable,
    Preprocessed,
    load_dataset,
    split_validation,
    subsample,
)
from .errors import ConfigurationError, DataFormatError
from .genotype import derive_seed, to_bitstring
from .objectives import EvaluationContext, Formulation, score_subset

# reserved slots in the seed hierarchy; generation indices start at 0, so the
# tags sit far away from anything the search engines use
_TAG_SPLIT = 900001
_TAG_SUBSAMPLE_TRAIN = 900002
_TAG_SUBSAMPLE_TEST = 900003
_TAG_SEARCH_CLASSIFIER = 900004
_TAG_TEST_CLASSIFIER = 900005

PRESETS: dict[str, dict] = {
    # quick desk-scale profile: subsampled training data, short runs
    "desk": {"gens": 50, "repeats": 5, "subsample_train": 10000},
    # full-scale profile matching the headline experiments
    "paper": {"gens": 500, "repeats": 10, "subsample_train": None},
}


@dataclass
class ExperimentConfig:
    algorithm: str = "nsga2"
    formulation: str = "dr3"
    dataset: str | dict = "nslkdd"
    train_path: str | None = None
    test_path: str | None = None
    classifier: str = "cart"
    classifier_options: dict = field(default_factory=dict)
    pop: int = 100
    gens: int = 500
    pc: float = 0.9
    pm: float = 1.0
    repeats: int = 10
    master_seed: int = 0
    validation_fraction: float = 0.2
    subsample_train: int | None = None
    subsample_test: int | None = None
    stratified: bool = True
    k_grid: tuple = baselines.DEFAULT_K_GRID
    out_dir: str | None = None
    workers: int = 1
    nsga3_divisions: int | None = None
    moead_divisions: int | None = None
    moead_neighborhood: int = 20
    external_archive: bool = False

    @property
    def formulation_enum(self) -> Formulation:
        return Formulation.parse(self.formulation)

    @property
    def label(self) -> str:
        if self.algorithm in baselines.BASELINE_METHODS:
            return self.algorithm
        return f"{self.algorithm}-{self.formulation.lower()}"

    def dataset_spec(self) -> DatasetSpec:
        if isinstance(self.dataset, dict):
            return DatasetSpec.from_dict(self.dataset)
        spec = BUILTIN_SPECS.get(str(self.dataset))
        if spec is None:
            known = ", ".join(sorted(BUILTIN_SPECS))
            raise ConfigurationError(
                f"unknown dataset {self.dataset!r} (built-ins: {known}; "
                "otherwise declare a spec dict in the config file)"
            )
        return spec

    def search_params(self) -> moea.SearchParams:
        return moea.SearchParams(
            pop_size=self.pop,
            generations=self.gens,
            crossover_prob=self.pc,
            mutation_prob=self.pm,
            nsga3_divisions=self.nsga3_divisions,
            moead_divisions=self.moead_divisions,
            moead_neighborhood=self.moead_neighborhood,
            keep_external_archive=self.external_archive,
        )

    def train_config(self, seed: int) -> classifiers.TrainConfig:
        cfg = classifiers.TrainConfig(kind=self.classifier, seed=seed)
        for key, value in self.classifier_options.items():
            if not hasattr(cfg, key) or key in ("kind", "seed"):
                raise ConfigurationError(f"unknown classifier option {key!r}")
            setattr(cfg, key, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        known = moea.ALGORITHMS + baselines.BASELINE_METHODS
        if self.algorithm not in known:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r} (choose from {', '.join(known)})"
            )
        formulation = self.formulation_enum
        if self.algorithm in moea.ALGORITHMS:
            moea.check_compatibility(self.algorithm, formulation)
            self.search_params().validate()
        if self.repeats < 1:
            raise ConfigurationError("repeats must be >= 1")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        for name in ("subsample_train", "subsample_test"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigurationError(f"{name} must be positive when set")
        if not self.k_grid:
            raise ConfigurationError("k_grid must not be empty")
        self.train_config(seed=0)
        self.dataset_spec()

    @staticmethod
    def build(file_values: dict | None = None, preset: str | None = None,
              overrides: dict | None = None) -> "ExperimentConfig":
        """Layer config sources: defaults < preset < config file < overrides."""
        merged: dict = {}
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigurationError(
                    f"unknown preset {preset!r} (choose from {', '.join(PRESETS)})"
                )
            merged.update(PRESETS[preset])
        for source in (file_values or {}, overrides or {}):
            for key, value in source.items():
                if value is None:
                    continue
                merged[key] = value
        valid = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
        unknown = set(merged) - valid
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "k_grid" in merged:
            merged["k_grid"] = tuple(int(k) for k in merged["k_grid"])
        cfg = ExperimentConfig(**merged)
        cfg.validate()
        return cfg

    @staticmethod
    def from_file(path: str, preset: str | None = None,
                  overrides: dict | None = None) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as err:
            raise ConfigurationError(f"cannot read config {path}: {err.strerror}")
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"config {path} is not valid JSON: {err}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        return ExperimentConfig.build(data, preset=preset, overrides=overrides)


@dataclass
class ArchiveRow:
    """One reported subset: search-time objectives plus test-set metrics."""

    bitstring: str
    size: int
    objectives: tuple[float, ...]
    test: metrics.MetricReport


@dataclass
class RunResult:
    repeat_index: int
    seed: tuple[int, int]
    rows: list[ArchiveRow]
    trace: list[dict]
    wall_seconds: float
    grid: baselines.BaselineGridResult | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    label: str
    feature_count: int
    runs: list[RunResult]
    basic: metrics.MetricReport
    out_dir: str | None = None


def _test_report(genome, full_train: FeatureTable, test: FeatureTable,
                 cfg: classifiers.TrainConfig) -> metrics.MetricReport:
    scores = score_subset(genome, full_train, test, cfg)
    return metrics.MetricReport(
        subset_size=scores.size,
        accuracy=scores.accuracy,
        detection_rate=scores.detection_rate,
        f1=scores.f1,
        feature_reduction=metrics.feature_reduction(scores.size, full_train.feature_count),
    )


def run_experiment(cfg: ExperimentConfig,
                   data: Preprocessed | None = None) -> ExperimentResult:
    """Execute all repeats of one configured experiment.

    `data` short-circuits CSV loading when the caller already holds the
    preprocessed tables (tests, repeated CLI invocations).
    """
    cfg.validate()
    spec = cfg.dataset_spec()
    if data is None:
        if not cfg.train_path or not cfg.test_path:
            raise ConfigurationError("train_path and test_path are required")
        data = load_dataset(spec, cfg.train_path, cfg.test_path)
    train_table, test_table = data.train, data.test
    master = cfg.master_seed
    if cfg.subsample_train is not None:
        train_table = subsample(train_table, cfg.subsample_train,
                                seed=derive_seed(master, _TAG_SUBSAMPLE_TRAIN),
                                stratified=cfg.stratified)
    if cfg.subsample_test is not None:
        test_table = subsample(test_table, cfg.subsample_test,
                               seed=derive_seed(master, _TAG_SUBSAMPLE_TEST),
                               stratified=cfg.stratified)
    if test_table.attack_count in (0, test_table.row_count):
        raise ConfigurationError("test table must contain both classes")

    split = split_validation(train_table, cfg.validation_fraction,
                             seed=derive_seed(master, _TAG_SPLIT))
    search_train = train_table.take(split.train_rows)
    validation = train_table.take(split.validation_rows)
    formulation = cfg.formulation_enum
    params = cfg.search_params()

    runs: list[RunResult] = []
    for r in range(cfg.repeats):
        search_clf = cfg.train_config(derive_seed(master, r, _TAG_SEARCH_CLASSIFIER))
        test_clf = cfg.train_config(derive_seed(master, r, _TAG_TEST_CLASSIFIER))
        ctx = EvaluationContext(train=search_train, validation=validation,
                                classifier=search_clf, formulation=formulation)
        trace: list[dict] = []
        grid = None
        started = time.perf_counter()
        if cfg.algorithm in moea.ALGORITHMS:
            archive = moea.run(cfg.algorithm, ctx, params, seed=(master, r),
                               progress=trace.append, workers=cfg.workers)
            rows = [
                ArchiveRow(
                    bitstring=to_bitstring(member.genome),
                    size=int(member.genome.sum()),
                    objectives=member.objectives,
                    test=_test_report(member.genome, train_table, test_table, test_clf),
                )
                for member in archive.members
            ]
        else:
            grid = baselines.run_baseline_grid(cfg.algorithm, ctx, train_table,
                                               test_table, test_clf, cfg.k_grid)
            best = grid.best
            if best.genome is not None:
                row = ArchiveRow(bitstring=to_bitstring(best.genome), size=best.k,
                                 objectives=(), test=best.test)
            else:  # PCA: size counts retained components, no genome exists
                row = ArchiveRow(bitstring="", size=best.k, objectives=(),
                                 test=best.test)
            rows = [row]
        wall = time.perf_counter() - started
        runs.append(RunResult(repeat_index=r, seed=(master, r), rows=rows,
                              trace=trace, wall_seconds=wall, grid=grid))

    # no-selection reference on exactly the same tables and test classifier
    all_features = np.ones(train_table.feature_count, dtype=np.uint8)
    basic = _test_report(all_features, train_table, test_table,
                         cfg.train_config(derive_seed(master, 0, _TAG_TEST_CLASSIFIER)))

    result = ExperimentResult(config=cfg, label=cfg.label,
                              feature_count=train_table.feature_count,
                              runs=runs, basic=basic, out_dir=cfg.out_dir)
    if cfg.out_dir is not None:
        write_experiment(result, cfg.out_dir)
    return result


def select_solution(rows: list[ArchiveRow]) -> ArchiveRow:
    """Reported solution of one run: best test accuracy, ties broken by
    higher detection rate, then smaller size, then lexicographic bitstring."""
    if not rows:
        raise ConfigurationError("empty archive")
    return min(rows, key=lambda r: (-r.test.accuracy, -r.test.detection_rate,
                                    r.size, r.bitstring))


# ---------------------------------------------------------------------------
# Statistics


@dataclass
class WelchResult:
    t: float
    df: float
    p_value: float
    significant: bool
    exact: bool = False  # True when zero variance forced an exact mean comparison


def welch_t_test(sample_a, sample_b, alpha: float = 0.05) -> WelchResult:
    """Two-sided unequal-variance t-test.

    When either sample has zero variance the t statistic is undefined; the
    result then falls back to exact mean comparison and is flagged.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least two values")
    mean_a, mean_b = a.mean(), b.mean()
    var_a, var_b = a.var(ddof=1), b.var(ddof=1)
    if var_a <= 0.0 or var_b <= 0.0:
        # mean() of identical values drifts by an ulp with sample count, so
        # the exact comparison needs a tolerance
        differ = not math.isclose(mean_a, mean_b, rel_tol=1e-9, abs_tol=1e-12)
        return WelchResult(t=math.nan, df=math.nan,
                           p_value=0.0 if differ else 1.0,
                           significant=differ, exact=True)
    se_a, se_b = var_a / len(a), var_b / len(b)
    t = (mean_a - mean_b) / math.sqrt(se_a + se_b)
    df = (se_a + se_b) ** 2 / (se_a ** 2 / (len(a) - 1) + se_b ** 2 / (len(b) - 1))
    # two-sided p from the regularized incomplete beta function
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return WelchResult(t=t, df=df, p_value=p, significant=p < alpha)


def sample_mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation (ddof=1); a single value has std 0."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty sample")
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


# ---------------------------------------------------------------------------
# Delimited exports


def _float_cell(x: float) -> str:
    return repr(float(x))


def _archive_header(objective_names: tuple[str, ...]) -> list[str]:
    return (["bitstring", "size"]
            + [f"obj_{name}" for name in objective_names]
            + ["test_accuracy", "test_detection_rate", "test_f1",
               "test_feature_reduction"])


def write_archive_csv(path, rows: list[ArchiveRow],
                      objective_names: tuple[str, ...]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_archive_header(objective_names))
        for row in rows:
            writer.writerow(
                [row.bitstring, row.size]
                + [_float_cell(v) for v in row.objectives]
                + [_float_cell(row.test.accuracy),
                   _float_cell(row.test.detection_rate),
                   _float_cell(row.test.f1),
                   _float_cell(row.test.feature_reduction)]
            )


def load_archive_csv(path) -> list[ArchiveRow]:
    """Parse an archive export back into memory, bit-exactly."""
    rows: list[ArchiveRow] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["bitstring", "size"]:
            raise DataFormatError(f"{path} is not an archive export")
        objective_cols = [i for i, name in enumerate(header) if name.startswith("obj_")]
        for cells in reader:
            size = int(cells[1])
            bitstring = cells[0]
            test = metrics.MetricReport(
                subset_size=size,
                accuracy=float(cells[-4]),
                detection_rate=float(cells[-3]),
                f1=float(cells[-2]),
                feature_reduction=float(cells[-1]),
            )
            rows.append(ArchiveRow(
                bitstring=bitstring,
                size=size,
                objectives=tuple(float(cells[i]) for i in objective_cols),
                test=test,
            ))
    return rows


def write_experiment(result: ExperimentResult, out_dir) -> None:
    """Write config echo, per-repeat archives/traces/meta, and the summary.

    Archive and trace files are byte-deterministic for a given config; wall
    times live in meta.json only.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_dict = asdict(result.config)
    cfg_dict["k_grid"] = list(result.config.k_grid)
    echo = {
        "config": cfg_dict,
        "label": result.label,
        "feature_count": result.feature_count,
    }
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
        fh.write("\n")

    objective_names = (result.config.formulation_enum.objective_names
                       if result.config.algorithm in moea.ALGORITHMS else ())
    for run in result.runs:
        rdir = out / f"repeat_{run.repeat_index:02d}"
        rdir.mkdir(exist_ok=True)
        write_archive_csv(rdir / "archive.csv", run.rows, objective_names)
        with open(rdir / "trace.jsonl", "w", encoding="utf-8") as fh:
            for record in run.trace:
                fh.write(json.dumps(record, sort_keys=True))
                fh.write("\n")
        with open(rdir / "meta.json", "w", encoding="utf-8") as fh:
            json.dump({"seed": list(run.seed), "wall_seconds": run.wall_seconds},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        if run.grid is not None:
            with open(rdir / "grid.csv", "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["k", "bitstring", "test_accuracy",
                                 "test_detection_rate", "test_f1"])
                for entry in run.grid.entries:
                    writer.writerow([
                        entry.k,
                        to_bitstring(entry.genome) if entry.genome is not None else "",
                        _float_cell(entry.test.accuracy),
                        _float_cell(entry.test.detection_rate),
                        _float_cell(entry.test.f1),
                    ])
                for warning in run.grid.warnings:
                    writer.writerow(["warning", warning, "", "", ""])

    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["repeat", "bitstring", "size", "test_accuracy",
                         "test_detection_rate", "test_f1", "test_feature_reduction"])
        for run in result.runs:
            pick = select_solution(run.rows)
            writer.writerow([run.repeat_index, pick.bitstring, pick.size,
                             _float_cell(pick.test.accuracy),
                             _float_cell(pick.test.detection_rate),
                             _float_cell(pick.test.f1),
                             _float_cell(pick.test.feature_reduction)])

    with open(out / "basic.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["size", "test_accuracy", "test_detection_rate",
                         "test_f1", "test_feature_reduction"])
        writer.writerow([result.basic.subset_size,
                         _float_cell(result.basic.accuracy),
                         _float_cell(result.basic.detection_rate),
                         _float_cell(result.basic.f1),
                         _float_cell(result.basic.feature_reduction)])


# ---------------------------------------------------------------------------
# Report assembly (consumed by the CLI `report` and `project` subcommands)


@dataclass
class MethodSamples:
    """Per-repeat reported metrics of one (method, classifier) pair."""

    label: str
    classifier: str
    sizes: list[float]
    accuracies: list[float]
    detection_rates: list[float]


def read_run_dir(run_dir) -> tuple[MethodSamples, dict]:
    """Load the summary samples and the config echo of one experiment dir."""
    run_dir = Path(run_dir)
    try:
        with open(run_dir / "config.json", encoding="utf-8") as fh:
            echo = json.load(fh)
    except OSError as err:
        raise DataFormatError(f"cannot read {run_dir}/config.json: {err.strerror}")
    label = echo.get("label", run_dir.name)
    classifier = echo.get("config", {}).get("classifier", "unknown")
    sizes, accs, drs = [], [], []
    try:
        with open(run_dir / "summary.csv", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for record in reader:
                sizes.append(float(record["size"]))
                accs.append(float(record["test_accuracy"]))
                drs.append(float(record["test_detection_rate"]))
    except OSError as err:
        raise DataFormatError(f"cannot read {run_dir}/summary.csv: {err.strerror}")
    if not sizes:
        raise DataFormatError(f"{run_dir}/summary.csv holds no repeats")
    return MethodSamples(label=label, classifier=classifier, sizes=sizes,
                         accuracies=accs, detection_rates=drs), echo


@dataclass
class StatRow:
    label: str
    classifier: str
    is_primary: bool
    size_mean: float
    size_std: float
    accuracy_mean: float
    accuracy_std: float
    dr_mean: float
    dr_std: float
    marks: dict = field(default_factory=dict)  # metric -> "+", "-", or ""
    wins: int = 0
    ties: int = 0
    losses: int = 0
    notes: list = field(default_factory=list)


_METRICS = ("size", "accuracy", "detection_rate")


def _samples_for(samples: MethodSamples, metric: str) -> list[float]:
    return {"size": samples.sizes, "accuracy": samples.accuracies,
            "detection_rate": samples.detection_rates}[metric]


def _better(metric: str, a: float, b: float) -> bool:
    """Is mean a better than mean b for this metric?"""
    return a < b if metric == "size" else a > b


def build_stat_rows(all_samples: list[MethodSamples], primary_label: str,
                    alpha: float = 0.05) -> list[StatRow]:
    """Mean/std rows with significance marks and w/t/l against the primary
    method (same classifier).  Marks: '+' primary significantly better, '-'
    significantly worse."""
    primaries: dict[str, MethodSamples] = {}
    for s in all_samples:
        if s.label == primary_label:
            primaries.setdefault(s.classifier, s)
    if not primaries:
        raise ConfigurationError(f"no input carries the primary label {primary_label!r}")
    rows: list[StatRow] = []
    for samples in all_samples:
        size_m, size_s = sample_mean_std(samples.sizes)
        acc_m, acc_s = sample_mean_std(samples.accuracies)
        dr_m, dr_s = sample_mean_std(samples.detection_rates)
        row = StatRow(
            label=samples.label, classifier=samples.classifier,
            is_primary=samples.label == primary_label,
            size_mean=size_m, size_std=size_s,
            accuracy_mean=acc_m, accuracy_std=acc_s,
            dr_mean=dr_m, dr_std=dr_s,
        )
        primary = primaries.get(samples.classifier)
        if not row.is_primary and primary is not None:
            for metric in _METRICS:
                ours = _samples_for(samples, metric)
                theirs = _samples_for(primary, metric)
                mark = ""
                if len(ours) >= 2 and len(theirs) >= 2:
                    outcome = welch_t_test(theirs, ours, alpha=alpha)
                    if outcome.exact:
                        row.notes.append(f"{metric}: zero variance, exact comparison")
                    if outcome.significant:
                        primary_mean = float(np.mean(theirs))
                        our_mean = float(np.mean(ours))
                        mark = "+" if _better(metric, primary_mean, our_mean) else "-"
                else:
                    row.notes.append(f"{metric}: too few repeats for significance")
                row.marks[metric] = mark
                our_mean = float(np.mean(ours))
                primary_mean = float(np.mean(theirs))
                # mean() of identical decimals drifts by an ulp depending on
                # sample count, so ties need a tolerance
                if math.isclose(our_mean, primary_mean, rel_tol=1e-9, abs_tol=1e-12):
                    row.ties += 1
                elif _better(metric, our_mean, primary_mean):
                    row.wins += 1
                else:
                    row.losses += 1
        elif not row.is_primary:
            row.notes.append("no primary run with the same classifier")
        rows.append(row)
    return rows


def _fmt_pct(mean: float, std: float) -> str:
    return f"{mean * 100:.2f}±{std * 100:.2f}"


def _fmt_size(mean: float, std: float) -> str:
    return f"{mean:.1f}±{std:.1f}"


def export_table(rows: list[StatRow], out_dir, single_repeat: bool = False) -> tuple[str, str]:
    """Write report.csv and an aligned report.txt; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    txt_path = out / "report.txt"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "classifier", "size", "accuracy",
                         "detection_rate", "size_mark", "accuracy_mark",
                         "detection_rate_mark", "wins", "ties", "losses"])
        for row in rows:
            writer.writerow([
                row.label, row.classifier,
                _fmt_size(row.size_mean, row.size_std),
                _fmt_pct(row.accuracy_mean, row.accuracy_std),
                _fmt_pct(row.dr_mean, row.dr_std),
                row.marks.get("size", ""), row.marks.get("accuracy", ""),
                row.marks.get("detection_rate", ""),
                "" if row.is_primary else row.wins,
                "" if row.is_primary else row.ties,
                "" if row.is_primary else row.losses,
            ])

    headers = ["method", "classifier", "size", "accuracy", "detection rate", "w/t/l"]
    lines = []
    for row in rows:
        name = row.label + (" *" if row.is_primary else "")
        wtl = "-" if row.is_primary else f"{row.wins}/{row.ties}/{row.losses}"
        lines.append([
            name, row.classifier,
            _fmt_size(row.size_mean, row.size_std) + _suffix(row.marks.get("size", "")),
            _fmt_pct(row.accuracy_mean, row.accuracy_std) + _suffix(row.marks.get("accuracy", "")),
            _fmt_pct(row.dr_mean, row.dr_std) + _suffix(row.marks.get("detection_rate", "")),
            wtl,
        ])
    widths = [max(len(headers[i]), *(len(line[i]) for line in lines)) for i in range(len(headers))]
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip() + "\n")
        fh.write("  ".join("-" * w for w in widths) + "\n")
        for line in lines:
            fh.write("  ".join(c.ljust(widths[i]) for i, c in enumerate(line)).rstrip() + "\n")
        fh.write("\n* designated primary method; accuracy and detection rate are "
                 "percentages (mean±std over repeats)\n")
        fh.write("+ / -: primary significantly better / worse (Welch two-sided, "
                 "alpha 0.05); w/t/l compares means from the row's perspective\n")
        if single_repeat:
            fh.write("note: a single repeat makes every std 0 by definition "
                     "(deterministic runs)\n")
        notes = sorted({f"{row.label}/{row.classifier}: {n}" for row in rows for n in row.notes})
        for note in notes:
            fh.write(f"note: {note}\n")
    return str(csv_path), str(txt_path)


def _suffix(mark: str) -> str:
    return f" {mark}" if mark else ""


_PROJECTION_PAIRS = (
    ("feature_reduction", "accuracy"),
    ("feature_reduction", "detection_rate"),
    ("accuracy", "detection_rate"),
)


def export_projection(archives: dict[str, list[ArchiveRow]], out_dir) -> list[str]:
    """Write the three pairwise projections of test metrics, one row per
    archive member per method, tagged by method label."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for x_name, y_name in _PROJECTION_PAIRS:
        path = out / f"projection_{x_name}_{y_name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", x_name, y_name])
            for label, rows in archives.items():
                for row in rows:
                    record = {
                        "feature_reduction": row.test.feature_reduction,
                        "accuracy": row.test.accuracy,
                        "detection_rate": row.test.detection_rate,
                    }
                    writer.writerow([label, _float_cell(record[x_name]),
                                     _float_cell(record[y_name])])
        paths.append(str(path))
    return paths

"""Classic feature-selection baselines: greedy forward selection, recursive
elimination by information gain, and PCA with a hand-rolled Jacobi solver.

Selection runs against the search context (train/validation); the grid runner
then refits on the full training table and reports test metrics per k.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import classifiers, metrics
from .dataset import FeatureTable
from .errors import ConfigurationError
from .genotype import Genome
from .objectives import EvaluationContext, score_subset

BASELINE_METHODS = ("sfs", "rfe", "pca")

DEFAULT_K_GRID = (5, 10, 15, 20, 25)


def sfs(ctx: EvaluationContext, k: int, trace: list | None = None) -> Genome:
    """Sequential forward selection by wrapper validation accuracy.

    Each round adds the feature with the best accuracy; ties keep the lowest
    feature index.  `trace`, when given, collects (feature, accuracy) per
    round; the greedy path is prefix-stable in k.
    """
    n = ctx.feature_count
    if not 1 <= k <= n:
        raise ConfigurationError(f"k={k} outside [1, {n}]")
    genome = np.zeros(n, dtype=np.uint8)
    for _ in range(k):
        best_feature = -1
        best_accuracy = -math.inf
        for f in range(n):
            if genome[f]:
                continue
            genome[f] = 1
            acc = ctx.scores(genome).accuracy
            genome[f] = 0
            if acc > best_accuracy:  # strict: earlier (lower) index wins ties
                best_feature, best_accuracy = f, acc
        genome[best_feature] = 1
        if trace is not None:
            trace.append((best_feature, best_accuracy))
    return genome


def rfe_elimination_order(ctx: EvaluationContext) -> list[int]:
    """Feature indices in elimination order (first eliminated first).

    Information gain is univariate, so the per-feature score cannot change as
    other features are removed; one computation fixes the whole order.  Ties
    eliminate the highest feature index first.
    """
    gains = [
        classifiers.information_gain(ctx.train.values[:, f], ctx.train.labels)
        for f in range(ctx.feature_count)
    ]
    surviving = list(range(ctx.feature_count))
    order: list[int] = []
    while surviving:
        low = min(gains[f] for f in surviving)
        worst = max(f for f in surviving if gains[f] == low)
        surviving.remove(worst)
        order.append(worst)
    return order


def rfe(ctx: EvaluationContext, k: int) -> Genome:
    """Recursive elimination down to k features by information gain."""
    n = ctx.feature_count
    if not 1 <= k <= n:
        raise ConfigurationError(f"k={k} outside [1, {n}]")
    genome = np.ones(n, dtype=np.uint8)
    for f in rfe_elimination_order(ctx)[: n - k]:
        genome[f] = 0
    return genome


# ---------------------------------------------------------------------------
# PCA


@dataclass
class PcaModel:
    column_means: np.ndarray
    components: np.ndarray  # n_features x k, one component per column
    explained_variance: np.ndarray  # k, descending


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-10,
                max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate every upper-triangle pair until the largest off-diagonal
    magnitude drops below tol.  Returns (eigenvalues, eigenvectors as
    columns), unsorted.
    """
    work = np.array(matrix, dtype=np.float64)
    n = work.shape[0]
    if work.ndim != 2 or work.shape[1] != n:
        raise ValueError("matrix must be square")
    if not np.allclose(work, work.T, atol=1e-9):
        raise ValueError("matrix must be symmetric")
    vectors = np.eye(n)
    if n == 1:
        return np.array([work[0, 0]]), vectors
    for _ in range(max_sweeps):
        off = np.abs(work - np.diag(np.diag(work))).max()
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = work[:, p].copy(), work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p, row_q = work[p, :].copy(), work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = work[q, p] = 0.0
                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
    return np.diag(work).copy(), vectors


def pca_fit(values: np.ndarray, components: int) -> PcaModel:
    """Principal components of the sample covariance, largest variance first.

    Component signs follow the convention that each component's largest
    absolute entry is positive.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 2:
        raise ValueError("need a 2-d matrix with at least two rows")
    n = values.shape[1]
    if not 1 <= components <= n:
        raise ConfigurationError(f"component count {components} outside [1, {n}]")
    means = values.mean(axis=0)
    centered = values - means
    covariance = centered.T @ centered / (values.shape[0] - 1)
    eigenvalues, eigenvectors = jacobi_eigh(covariance)
    order = np.argsort(-eigenvalues, kind="stable")[:components]
    chosen = eigenvectors[:, order].copy()
    for j in range(chosen.shape[1]):
        anchor = int(np.argmax(np.abs(chosen[:, j])))
        if chosen[anchor, j] < 0:
            chosen[:, j] = -chosen[:, j]
    return PcaModel(
        column_means=means,
        components=chosen,
        explained_variance=eigenvalues[order].copy(),
    )


def pca_transform(values: np.ndarray, model: PcaModel) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != model.column_means.shape[0]:
        raise ValueError("column count does not match the fitted model")
    return (values - model.column_means) @ model.components


# ---------------------------------------------------------------------------
# Grid runner


@dataclass
class GridEntry:
    k: int
    genome: Genome | None  # None for PCA (components, not original features)
    test: metrics.MetricReport


@dataclass
class BaselineGridResult:
    method: str
    entries: list[GridEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def best(self) -> GridEntry:
        """First entry with maximal test accuracy, so ties resolve to the
        smallest k (entries are in grid order)."""
        if not self.entries:
            raise ConfigurationError("no feasible k in the grid")
        best = self.entries[0]
        for entry in self.entries[1:]:
            if entry.test.accuracy > best.test.accuracy:
                best = entry
        return best


def _pca_test_report(full_train: FeatureTable, test: FeatureTable, k: int,
                     cfg: classifiers.TrainConfig) -> metrics.MetricReport:
    model = pca_fit(full_train.values, k)
    train_z = pca_transform(full_train.values, model)
    test_z = pca_transform(test.values, model)
    clf = classifiers.train(train_z, full_train.labels, cfg)
    cm = metrics.confusion(test.labels, classifiers.predict(clf, test_z))
    return metrics.MetricReport(
        subset_size=k,
        accuracy=metrics.accuracy(cm),
        detection_rate=metrics.detection_rate(cm),
        f1=metrics.f1(cm),
        feature_reduction=metrics.feature_reduction(k, full_train.feature_count),
    )


def _genome_test_report(genome: Genome, full_train: FeatureTable,
                        test: FeatureTable, cfg: classifiers.TrainConfig) -> metrics.MetricReport:
    scores = score_subset(genome, full_train, test, cfg)
    return metrics.MetricReport(
        subset_size=scores.size,
        accuracy=scores.accuracy,
        detection_rate=scores.detection_rate,
        f1=scores.f1,
        feature_reduction=metrics.feature_reduction(scores.size, full_train.feature_count),
    )


def run_baseline_grid(method: str, ctx: EvaluationContext,
                      full_train: FeatureTable, test: FeatureTable,
                      test_classifier: classifiers.TrainConfig,
                      k_grid=DEFAULT_K_GRID) -> BaselineGridResult:
    """Run one baseline at every feasible k and score each pick on the test
    table with a classifier refit on the full training table.

    Infeasible k values (outside [1, feature count]) are skipped with a
    warning.  The reported best entry maximizes test accuracy, first maximal
    winning ties.
    """
    if method not in BASELINE_METHODS:
        raise ConfigurationError(f"unknown baseline method {method!r}")
    n = ctx.feature_count
    result = BaselineGridResult(method=method)
    feasible = []
    for k in k_grid:
        if 1 <= k <= n:
            feasible.append(int(k))
        else:
            result.warnings.append(f"skipping k={k}: outside [1, {n}]")
    if method == "sfs":
        trace: list[tuple[int, float]] = []
        if feasible:
            sfs(ctx, max(feasible), trace=trace)
        for k in feasible:
            genome = np.zeros(n, dtype=np.uint8)
            for f, _ in trace[:k]:
                genome[f] = 1
            result.entries.append(GridEntry(
                k=k, genome=genome,
                test=_genome_test_report(genome, full_train, test, test_classifier),
            ))
    elif method == "rfe":
        order = rfe_elimination_order(ctx)
        for k in feasible:
            genome = np.ones(n, dtype=np.uint8)
            for f in order[: n - k]:
                genome[f] = 0
            result.entries.append(GridEntry(
                k=k, genome=genome,
                test=_genome_test_report(genome, full_train, test, test_classifier),
            ))
    else:
        for k in feasible:
            result.entries.append(GridEntry(
                k=k, genome=None,
                test=_pca_test_report(full_train, test, k, test_classifier),
            ))
    return result

"""Shared fixtures and the acceptance summary hook."""

import itertools

import numpy as np
import pytest

from mofs import classifiers, dataset, metrics, synth
from mofs.objectives import EvaluationContext, Formulation

# ---------------------------------------------------------------------------
# Small synthetic fixtures (fast paths for unit tests)


@pytest.fixture(scope="session")
def tiny_pair():
    """Train/test tables with 2 signal + 4 noise features."""
    return synth.two_signal_pair(train_rows=600, test_rows=400,
                                 noise_features=4, seed=11, label_noise=0.02)


@pytest.fixture(scope="session")
def tiny_split(tiny_pair):
    train, _ = tiny_pair
    split = dataset.split_validation(train, 0.2, seed=5)
    return train.take(split.train_rows), train.take(split.validation_rows)


@pytest.fixture()
def make_ctx(tiny_split):
    search, validation = tiny_split

    def build(formulation="DR3", kind="cart", seed=13, **cfg_kwargs):
        cfg = classifiers.TrainConfig(kind=kind, seed=seed, **cfg_kwargs)
        return EvaluationContext(search, validation, cfg,
                                 Formulation.parse(formulation))

    return build


# ---------------------------------------------------------------------------
# The 12-feature enumeration instance (2 informative + 10 noise, 2000 rows)


@pytest.fixture(scope="session")
def wide_instance():
    return synth.two_signal_instance(rows=2000, noise_features=10, seed=7,
                                     label_noise=0.02)


@pytest.fixture(scope="session")
def wide_split(wide_instance):
    split = dataset.split_validation(wide_instance, 0.2, seed=21)
    return (wide_instance.take(split.train_rows),
            wide_instance.take(split.validation_rows))


WRAPPER_SEED = 13


def standalone_scores(genome: np.ndarray, search, validation) -> tuple:
    """Raw wrapper scores (size, accuracy, dr, f1) computed without the
    objectives module: direct train/predict plus metric arithmetic.  Serves
    as the independent oracle."""
    cols = np.flatnonzero(genome)
    cfg = classifiers.TrainConfig(kind="cart", seed=WRAPPER_SEED)
    model = classifiers.train_cart(search.values[:, cols], search.labels, cfg)
    pred = classifiers.predict(model, validation.values[:, cols])
    cm = metrics.confusion(validation.labels, pred)
    return (int(cols.size), metrics.accuracy(cm),
            metrics.detection_rate(cm), metrics.f1(cm))


def standalone_dr3(genome: np.ndarray, search, validation) -> tuple:
    size, acc, dr, _ = standalone_scores(genome, search, validation)
    return (-float(size), acc, dr)


@pytest.fixture(scope="session")
def exhaustive_scores(wide_split):
    """Wrapper scores of every non-empty subset of the 12 features, keyed by
    bitstring, computed through the standalone path."""
    search, validation = wide_split
    n = search.feature_count
    table = {}
    for mask in range(1, 2 ** n):
        genome = np.array([(mask >> i) & 1 for i in range(n)], dtype=np.uint8)
        bits = "".join(str(b) for b in genome)
        table[bits] = standalone_scores(genome, search, validation)
    return table


@pytest.fixture(scope="session")
def exhaustive_dr3(exhaustive_scores):
    """DR3 objective vectors of every non-empty 12-feature subset."""
    return {bits: (-float(s[0]), s[1], s[2])
            for bits, s in exhaustive_scores.items()}


def pareto_front(vectors: list[tuple]) -> list[int]:
    """Indices of nondominated vectors by the pairwise dominance definition.
    Independent of the library's sorting code."""

    def dom(a, b):
        return all(x >= y for x, y in zip(a, b)) and a != b

    keep = []
    for i, v in enumerate(vectors):
        if not any(dom(w, v) for j, w in enumerate(vectors) if j != i):
            keep.append(i)
    return keep


# ---------------------------------------------------------------------------
# Acceptance summary: one line per criterion at the end of the run

ACCEPTANCE_PREFIX = "test_criterion_"
_acceptance_outcomes: dict[str, tuple[str, str]] = {}


def _skip_reason(report) -> str:
    if isinstance(report.longrepr, tuple):
        reason = report.longrepr[2]
        return reason.removeprefix("Skipped: ")
    return ""


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if ACCEPTANCE_PREFIX not in name:
        return
    key = name.split("[", 1)[0]
    if report.when not in ("setup", "call"):
        return
    current = _acceptance_outcomes.get(key, ("", ""))[0]
    if report.failed or current == "FAIL":
        _acceptance_outcomes[key] = ("FAIL", "")
    elif report.skipped:
        _acceptance_outcomes[key] = ("SKIP", _skip_reason(report))
    elif report.when == "call" and current != "SKIP":
        _acceptance_outcomes[key] = ("PASS", "")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance_outcomes):
        number = key[len(ACCEPTANCE_PREFIX):].split("_", 1)[0]
        label = key[len(ACCEPTANCE_PREFIX):].split("_", 1)[1].replace("_", " ")
        outcome, note = _acceptance_outcomes[key]
        line = f"criterion {int(number):2d} {outcome:4s} {label}"
        if note:
            line += f" ({note})"
        terminalreporter.write_line(line)


def all_bit_pairs(n: int):
    """Every ordered pair of length-n genomes (4**n pairs)."""
    space = [np.array(bits, dtype=np.uint8)
             for bits in itertools.product((0, 1), repeat=n)]
    return itertools.product(space, space)

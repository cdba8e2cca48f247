"""Synthetic instances for demos and self-contained validation.

The two-signal instance hides its label rule in the first two features
(label 1 when both exceed 0.5) and pads with uniform noise features plus a
configurable label-flip rate, so deep trees overfit when given everything.
"""

import csv

import numpy as np

from .dataset import DatasetSpec, FeatureTable
from .genotype import derive_rng, derive_seed


def two_signal_instance(rows: int = 2000, noise_features: int = 10,
                        seed: int = 7, label_noise: float = 0.02) -> FeatureTable:
    """Rows over [0,1]^n with y = (x0 > 0.5 and x1 > 0.5), then noisy flips."""
    if rows < 1 or noise_features < 0:
        raise ValueError("rows must be positive and noise_features >= 0")
    rng = derive_rng(seed)
    values = rng.random((rows, 2 + noise_features))
    labels = ((values[:, 0] > 0.5) & (values[:, 1] > 0.5)).astype(np.int8)
    flips = rng.random(rows) < label_noise
    labels = np.where(flips, 1 - labels, labels).astype(np.int8)
    return FeatureTable(values, labels)


def two_signal_pair(train_rows: int = 2000, test_rows: int = 2000,
                    noise_features: int = 10, seed: int = 7,
                    label_noise: float = 0.02) -> tuple[FeatureTable, FeatureTable]:
    """Independent train/test tables drawn from the same process."""
    train = two_signal_instance(train_rows, noise_features,
                                derive_seed(seed, 0), label_noise)
    test = two_signal_instance(test_rows, noise_features,
                               derive_seed(seed, 1), label_noise)
    return train, test


def demo_spec(feature_count: int, categorical: bool = False) -> DatasetSpec:
    """Layout of the CSV files written by write_demo_csv."""
    return DatasetSpec(
        name="demo",
        feature_count=feature_count,
        label_column=feature_count,
        categorical_columns=(feature_count - 1,) if categorical else (),
        ignored_columns=(),
        has_header=False,
        normal_labels=frozenset({"normal"}),
        attack_labels=frozenset({"attack"}),
    )


_BUCKETS = ("low", "mid", "high")


def write_demo_csv(table: FeatureTable, path: str, categorical: bool = False) -> DatasetSpec:
    """Serialize a table as a raw CSV the loader can ingest.

    With `categorical`, the last feature column is bucketed into three
    category strings to exercise the ordinal encoder.
    """
    spec = demo_spec(table.feature_count, categorical)
    last = table.feature_count - 1
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for i in range(table.row_count):
            cells = [repr(float(v)) for v in table.values[i]]
            if categorical:
                cells[last] = _BUCKETS[min(2, int(table.values[i, last] * 3))]
            cells.append("attack" if table.labels[i] else "normal")
            writer.writerow(cells)
    return spec

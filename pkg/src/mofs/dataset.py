"""Dataset loading and preprocessing for intrusion-detection CSV corpora.

Pipeline: load raw string cells -> clean defective rows -> split features from
labels -> fit/apply ordinal encoding (categorical columns) -> fit/apply min-max
normalization -> FeatureTable with values in [0, 1] and 0/1 labels (attack=1).
Encoders and normalizers fit on training rows only.
"""

import csv
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataFormatError
from .genotype import derive_rng

# labels that count as missing values, compared lowercase after stripping
_MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "?"})

# Attack name catalog for the KDD-derived corpus, grouped by family.  The
# binary task folds all families into label 1.
DOS_ATTACKS = frozenset({
    "back", "land", "neptune", "pod", "smurf", "teardrop",
    "apache2", "mailbomb", "processtable", "udpstorm",
})
PROBE_ATTACKS = frozenset({
    "ipsweep", "nmap", "portsweep", "satan", "mscan", "saint",
})
R2L_ATTACKS = frozenset({
    "ftp_write", "guess_passwd", "imap", "multihop", "phf", "spy",
    "warezclient", "warezmaster", "httptunnel", "named", "sendmail",
    "snmpgetattack", "snmpguess", "worm", "xlock", "xsnoop",
})
U2R_ATTACKS = frozenset({
    "buffer_overflow", "loadmodule", "perl", "rootkit",
    "ps", "sqlattack", "xterm",
})
KDD_ATTACKS = DOS_ATTACKS | PROBE_ATTACKS | R2L_ATTACKS | U2R_ATTACKS


@dataclass(frozen=True)
class DatasetSpec:
    """Layout of one CSV corpus.  All column indices are raw-file coordinates."""

    name: str
    feature_count: int
    label_column: int
    categorical_columns: tuple[int, ...]
    normal_labels: frozenset[str]
    attack_labels: frozenset[str]
    ignored_columns: tuple[int, ...] = ()
    has_header: bool = False

    @property
    def column_count(self) -> int:
        return self.feature_count + 1 + len(self.ignored_columns)

    def feature_columns(self) -> list[int]:
        skip = set(self.ignored_columns) | {self.label_column}
        return [i for i in range(self.column_count) if i not in skip]

    def categorical_feature_indices(self) -> list[int]:
        """Categorical positions in feature coordinates (after dropping
        label/ignored columns)."""
        cols = self.feature_columns()
        return [cols.index(c) for c in self.categorical_columns]

    def validate(self) -> None:
        if self.feature_count < 1:
            raise ConfigurationError("feature_count must be positive")
        cols = set(range(self.column_count))
        if self.label_column not in cols:
            raise ConfigurationError("label_column outside the declared layout")
        if self.label_column in self.ignored_columns:
            raise ConfigurationError("label_column cannot be ignored")
        for c in self.categorical_columns:
            if c not in cols or c == self.label_column or c in self.ignored_columns:
                raise ConfigurationError(f"bad categorical column index {c}")
        if len(set(self.ignored_columns)) != len(self.ignored_columns):
            raise ConfigurationError("duplicate ignored columns")
        if not self.normal_labels or not self.attack_labels:
            raise ConfigurationError("both label classes need at least one name")
        if self.normal_labels & self.attack_labels:
            raise ConfigurationError("a label string appears in both classes")

    def binarize_one(self, label: str) -> int:
        text = label.strip()
        if text in self.normal_labels:
            return 0
        if text in self.attack_labels:
            return 1
        raise DataFormatError(f"unrecognized class label: {text!r}")

    @staticmethod
    def from_dict(data: dict) -> "DatasetSpec":
        try:
            spec = DatasetSpec(
                name=str(data["name"]),
                feature_count=int(data["feature_count"]),
                label_column=int(data["label_column"]),
                categorical_columns=tuple(int(c) for c in data.get("categorical_columns", ())),
                ignored_columns=tuple(int(c) for c in data.get("ignored_columns", ())),
                has_header=bool(data.get("has_header", False)),
                normal_labels=frozenset(str(s) for s in data["normal_labels"]),
                attack_labels=frozenset(str(s) for s in data["attack_labels"]),
            )
        except KeyError as err:
            raise ConfigurationError(f"dataset spec missing key: {err}") from None
        spec.validate()
        return spec


NSLKDD = DatasetSpec(
    name="nslkdd",
    feature_count=41,
    label_column=41,
    categorical_columns=(1, 2, 3),  # protocol_type, service, flag
    ignored_columns=(42,),  # difficulty score
    has_header=False,
    normal_labels=frozenset({"normal"}),
    attack_labels=KDD_ATTACKS,
)

UNSWNB15 = DatasetSpec(
    name="unswnb15",
    feature_count=42,
    label_column=44,
    categorical_columns=(2, 3, 4),  # proto, service, state
    ignored_columns=(0, 43),  # id, attack_cat
    has_header=True,
    normal_labels=frozenset({"0"}),
    attack_labels=frozenset({"1"}),
)

BUILTIN_SPECS = {spec.name: spec for spec in (NSLKDD, UNSWNB15)}


@dataclass
class FeatureTable:
    """Numeric table ready for training: values in [0, 1], labels 0/1."""

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.values.ndim != 2:
            raise DataFormatError("feature values must be a 2-d matrix")
        if self.labels.shape != (self.values.shape[0],):
            raise DataFormatError("labels must align with value rows")
        if self.values.size and not (
            np.isfinite(self.values).all()
            and self.values.min() >= 0.0
            and self.values.max() <= 1.0
        ):
            raise DataFormatError("feature values must be finite and within [0, 1]")
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise DataFormatError("labels must be 0 or 1")

    @property
    def row_count(self) -> int:
        return self.values.shape[0]

    @property
    def feature_count(self) -> int:
        return self.values.shape[1]

    @property
    def attack_count(self) -> int:
        return int(self.labels.sum())

    def take(self, rows: np.ndarray) -> "FeatureTable":
        return FeatureTable(self.values[rows], self.labels[rows])


@dataclass
class EncodingMap:
    """Per-column category codes, in first-appearance order of the fit rows.
    Keys are feature coordinates, not raw-file columns."""

    codes: dict[int, dict[str, int]] = field(default_factory=dict)


@dataclass
class NormalizationParams:
    col_min: np.ndarray
    col_max: np.ndarray


@dataclass
class SplitIndices:
    """Row partition of a training table into search-train and validation."""

    train_rows: np.ndarray
    validation_rows: np.ndarray
    seed: int


def load_csv(path: str, spec: DatasetSpec) -> list[list[str]]:
    """Read raw rows as string cells, enforcing the declared column count.

    Cells are interned: these corpora repeat a small vocabulary millions of
    times and would not fit in memory otherwise.
    """
    spec.validate()
    rows: list[list[str]] = []
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as err:
        raise DataFormatError(f"cannot open {path}: {err.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        for line_no, cells in enumerate(reader, start=1):
            if spec.has_header and line_no == 1:
                if len(cells) != spec.column_count:
                    raise DataFormatError(
                        f"expected {spec.column_count} columns, header has {len(cells)}",
                        line=line_no,
                    )
                continue
            if len(cells) != spec.column_count:
                raise DataFormatError(
                    f"expected {spec.column_count} columns, got {len(cells)}",
                    line=line_no,
                )
            rows.append([sys.intern(c) for c in cells])
    return rows


def _is_defective(cell: str) -> bool:
    text = cell.strip()
    if text.lower() in _MISSING_TOKENS:
        return True
    try:
        return not math.isfinite(float(text))
    except ValueError:
        return False  # plain category strings are fine


def clean(rows: list[list[str]]) -> tuple[list[list[str]], int]:
    """Drop rows with missing markers or non-finite numerics; count them."""
    kept = [row for row in rows if not any(_is_defective(c) for c in row)]
    return kept, len(rows) - len(kept)


def split_features_labels(rows: list[list[str]], spec: DatasetSpec) -> tuple[list[list[str]], list[str]]:
    cols = spec.feature_columns()
    label_col = spec.label_column
    features = [[row[c] for c in cols] for row in rows]
    labels = [row[label_col] for row in rows]
    return features, labels


def binarize_labels(raw_labels: list[str], spec: DatasetSpec) -> np.ndarray:
    return np.array([spec.binarize_one(s) for s in raw_labels], dtype=np.int8)


def fit_ordinal_encoder(feature_rows: list[list[str]], spec: DatasetSpec) -> EncodingMap:
    """Assign integer codes to category strings in first-appearance order."""
    enc = EncodingMap()
    for col in spec.categorical_feature_indices():
        mapping: dict[str, int] = {}
        for row in feature_rows:
            cell = row[col].strip()
            if cell not in mapping:
                mapping[cell] = len(mapping)
        enc.codes[col] = mapping
    return enc


def _encode_string_column(cells: list[str], mapping: dict[str, int]) -> np.ndarray:
    unseen = len(mapping)
    out = np.empty(len(cells), dtype=np.float64)
    for i, cell in enumerate(cells):
        text = cell.strip()
        code = mapping.get(text)
        if code is None:
            # already-encoded numerics in range pass through unchanged
            try:
                v = float(text)
            except ValueError:
                v = None
            code = int(v) if v is not None and v.is_integer() and 0 <= v <= unseen else unseen
        out[i] = code
    return out


def apply_encoder(feature_rows, enc: EncodingMap, spec: DatasetSpec) -> np.ndarray:
    """Encode categorical columns and parse the rest as floats.

    Accepts raw string rows or an already-numeric matrix; re-applying to its
    own output is the identity (unseen and in-range codes are stable).
    """
    if isinstance(feature_rows, np.ndarray):
        out = np.array(feature_rows, dtype=np.float64)
        for col, mapping in enc.codes.items():
            unseen = len(mapping)
            vals = out[:, col]
            ok = (vals == np.floor(vals)) & (vals >= 0) & (vals <= unseen)
            out[:, col] = np.where(ok, vals, unseen)
        return out

    n = spec.feature_count
    out = np.empty((len(feature_rows), n), dtype=np.float64)
    categorical = set(enc.codes)
    for col in range(n):
        cells = [row[col] for row in feature_rows]
        if col in categorical:
            out[:, col] = _encode_string_column(cells, enc.codes[col])
        else:
            try:
                out[:, col] = np.array(cells, dtype=np.float64)
            except ValueError:
                bad = next(c for c in cells if not _parses_as_float(c))
                raise DataFormatError(
                    f"feature column {col}: cannot parse {bad!r} as numeric"
                ) from None
    return out


def _parses_as_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def fit_minmax(values: np.ndarray) -> NormalizationParams:
    if values.ndim != 2 or values.shape[0] < 1:
        raise DataFormatError("normalization needs a non-empty 2-d matrix")
    return NormalizationParams(col_min=values.min(axis=0), col_max=values.max(axis=0))


def apply_minmax(values: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Scale to [0, 1] with the fitted ranges; out-of-range values clip and
    constant columns map to zero."""
    span = params.col_max - params.col_min
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = (values - params.col_min) / span
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def split_validation(table: FeatureTable, fraction: float = 0.2, seed: int = 0) -> SplitIndices:
    """Hold out floor(rows * fraction) rows, chosen uniformly without
    stratification; both sides must end up non-empty."""
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError("validation fraction must be in (0, 1)")
    count = math.floor(table.row_count * fraction)
    if count < 1 or count >= table.row_count:
        raise ConfigurationError(
            f"validation split of {table.row_count} rows at {fraction} is degenerate"
        )
    perm = derive_rng(seed).permutation(table.row_count)
    return SplitIndices(
        train_rows=np.sort(perm[count:]),
        validation_rows=np.sort(perm[:count]),
        seed=seed,
    )


def subsample(table: FeatureTable, max_rows: int, seed: int = 0,
              stratified: bool = True) -> FeatureTable:
    """Reduce to at most max_rows rows, keeping class shares within one row of
    the original proportion when stratified.  Original row order is kept."""
    if max_rows < 1:
        raise ConfigurationError("max_rows must be positive")
    total = table.row_count
    if max_rows >= total:
        return table
    rng = derive_rng(seed)
    if not stratified:
        keep = np.sort(rng.choice(total, size=max_rows, replace=False))
        return table.take(keep)
    attack_rows = np.flatnonzero(table.labels == 1)
    normal_rows = np.flatnonzero(table.labels == 0)
    if len(attack_rows) == 0 or len(normal_rows) == 0:
        raise ConfigurationError("stratified subsample needs both classes present")
    want_attacks = round(max_rows * len(attack_rows) / total)
    want_attacks = min(max(want_attacks, max_rows - len(normal_rows)), len(attack_rows), max_rows)
    keep_attacks = rng.choice(attack_rows, size=want_attacks, replace=False)
    keep_normals = rng.choice(normal_rows, size=max_rows - want_attacks, replace=False)
    keep = np.sort(np.concatenate([keep_attacks, keep_normals]))
    return table.take(keep)


@dataclass
class Preprocessed:
    """Everything the experiment needs from one train/test CSV pair."""

    spec: DatasetSpec
    train: FeatureTable
    test: FeatureTable
    encoder: EncodingMap
    normalizer: NormalizationParams
    train_rows_dropped: int
    test_rows_dropped: int


def load_dataset(spec: DatasetSpec, train_path: str, test_path: str) -> Preprocessed:
    """Run the full preprocessing pipeline, fitting on training rows only."""
    train_raw, train_dropped = clean(load_csv(train_path, spec))
    test_raw, test_dropped = clean(load_csv(test_path, spec))
    if not train_raw or not test_raw:
        raise DataFormatError("no usable rows after loading and cleaning")
    train_feats, train_labels = split_features_labels(train_raw, spec)
    test_feats, test_labels = split_features_labels(test_raw, spec)
    encoder = fit_ordinal_encoder(train_feats, spec)
    train_encoded = apply_encoder(train_feats, encoder, spec)
    test_encoded = apply_encoder(test_feats, encoder, spec)
    normalizer = fit_minmax(train_encoded)
    return Preprocessed(
        spec=spec,
        train=FeatureTable(apply_minmax(train_encoded, normalizer),
                           binarize_labels(train_labels, spec)),
        test=FeatureTable(apply_minmax(test_encoded, normalizer),
                          binarize_labels(test_labels, spec)),
        encoder=encoder,
        normalizer=normalizer,
        train_rows_dropped=train_dropped,
        test_rows_dropped=test_dropped,
    )


def save_table(table: FeatureTable, base_path: str) -> tuple[str, str]:
    """Write <base>.npz plus a <base>.json integrity sidecar."""
    npz_path, sidecar_path = base_path + ".npz", base_path + ".json"
    np.savez_compressed(npz_path, values=table.values, labels=table.labels)
    sidecar = {
        "rows": table.row_count,
        "features": table.feature_count,
        "attacks": table.attack_count,
        "normals": table.row_count - table.attack_count,
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return npz_path, sidecar_path


def load_table(base_path: str) -> FeatureTable:
    """Read a cached table, checking it against its sidecar."""
    try:
        with np.load(base_path + ".npz") as data:
            table = FeatureTable(data["values"], data["labels"])
        with open(base_path + ".json", encoding="utf-8") as fh:
            sidecar = json.load(fh)
    except (OSError, KeyError) as err:
        raise DataFormatError(f"cannot load cached table {base_path}: {err}") from None
    expected = {
        "rows": table.row_count,
        "features": table.feature_count,
        "attacks": table.attack_count,
        "normals": table.row_count - table.attack_count,
    }
    if sidecar != expected:
        raise DataFormatError(
            f"cached table {base_path} does not match its sidecar: "
            f"{sidecar} vs {expected}"
        )
    return table

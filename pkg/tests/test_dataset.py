import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mofs import dataset, synth
from mofs.errors import ConfigurationError, DataFormatError

SPEC3 = dataset.DatasetSpec(
    name="toy",
    feature_count=3,
    label_column=3,
    categorical_columns=(1,),
    normal_labels=frozenset({"normal"}),
    attack_labels=frozenset({"attack"}),
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# Raw loading


def test_load_csv_round(tmp_path):
    path = write(tmp_path, "ok.csv", "1.0,tcp,3,normal\n2.0,udp,4,attack\n")
    rows = dataset.load_csv(path, SPEC3)
    assert rows == [["1.0", "tcp", "3", "normal"], ["2.0", "udp", "4", "attack"]]


def test_load_csv_empty_file(tmp_path):
    assert dataset.load_csv(write(tmp_path, "empty.csv", ""), SPEC3) == []


def test_load_csv_bad_width_reports_line(tmp_path):
    path = write(tmp_path, "bad.csv", "1,tcp,3,normal\n1,tcp,normal\n")
    with pytest.raises(DataFormatError, match="line 2"):
        dataset.load_csv(path, SPEC3)


def test_load_csv_header_counts_toward_line_numbers(tmp_path):
    spec = dataset.DatasetSpec(
        name="toy-h", feature_count=3, label_column=3, categorical_columns=(),
        has_header=True, normal_labels=frozenset({"normal"}),
        attack_labels=frozenset({"attack"}))
    path = write(tmp_path, "hdr.csv", "a,b,c,label\n1,2,3,normal\n1,2,normal\n")
    with pytest.raises(DataFormatError, match="line 3"):
        dataset.load_csv(path, spec)


def test_load_csv_missing_file():
    with pytest.raises(DataFormatError, match="cannot open"):
        dataset.load_csv("/nonexistent/never.csv", SPEC3)


def test_clean_drops_defective_rows():
    rows = [
        ["1", "tcp", "3", "normal"],
        ["NaN", "tcp", "3", "normal"],
        ["1", "tcp", "", "attack"],
        ["inf", "tcp", "3", "attack"],
        ["1", "?", "3", "normal"],
        ["2", "udp", "4", "attack"],
    ]
    kept, removed = dataset.clean(rows)
    assert removed == 4
    assert kept == [rows[0], rows[5]]


def test_clean_identity_when_no_defects():
    rows = [["1", "tcp", "3", "normal"]]
    kept, removed = dataset.clean(rows)
    assert kept == rows and removed == 0


# ---------------------------------------------------------------------------
# Labels


def test_binarize_labels():
    labels = dataset.binarize_labels(["normal", "attack", "normal"], SPEC3)
    assert labels.tolist() == [0, 1, 0]
    assert labels.dtype == np.int8


def test_binarize_kdd_names():
    assert dataset.NSLKDD.binarize_one("normal") == 0
    assert dataset.NSLKDD.binarize_one("neptune") == 1
    assert dataset.NSLKDD.binarize_one("rootkit") == 1
    with pytest.raises(DataFormatError, match="'\\?\\?\\?'"):
        dataset.NSLKDD.binarize_one("???")


def test_builtin_spec_shapes():
    assert dataset.NSLKDD.feature_count == 41
    assert dataset.NSLKDD.column_count == 43
    assert dataset.NSLKDD.label_column == 41
    assert dataset.NSLKDD.ignored_columns == (42,)
    assert len(dataset.KDD_ATTACKS) == 39
    assert dataset.UNSWNB15.feature_count == 42
    assert dataset.UNSWNB15.column_count == 45
    assert dataset.UNSWNB15.has_header
    for spec in dataset.BUILTIN_SPECS.values():
        spec.validate()


def test_spec_validation_errors():
    with pytest.raises(ConfigurationError):
        dataset.DatasetSpec(
            name="x", feature_count=2, label_column=5, categorical_columns=(),
            normal_labels=frozenset({"n"}), attack_labels=frozenset({"a"}),
        ).validate()
    with pytest.raises(ConfigurationError):
        dataset.DatasetSpec(
            name="x", feature_count=2, label_column=2, categorical_columns=(),
            normal_labels=frozenset({"both"}), attack_labels=frozenset({"both"}),
        ).validate()


# ---------------------------------------------------------------------------
# Encoding


def test_ordinal_encoder_first_appearance():
    rows = [["0", "tcp", "1"], ["0", "udp", "1"], ["0", "tcp", "1"], ["0", "icmp", "1"]]
    enc = dataset.fit_ordinal_encoder(rows, SPEC3)
    assert enc.codes[1] == {"tcp": 0, "udp": 1, "icmp": 2}
    encoded = dataset.apply_encoder(rows, enc, SPEC3)
    assert encoded[:, 1].tolist() == [0.0, 1.0, 0.0, 2.0]


def test_ordinal_encoder_unseen_category():
    rows = [["0", "tcp", "1"], ["0", "udp", "1"], ["0", "icmp", "1"]]
    enc = dataset.fit_ordinal_encoder(rows, SPEC3)
    encoded = dataset.apply_encoder([["0", "sctp", "1"]], enc, SPEC3)
    assert encoded[0, 1] == 3.0


def test_encoder_idempotent_on_encoded_matrix():
    rows = [["0.5", "tcp", "1"], ["1.5", "udp", "2"], ["2.5", "sctp", "3"]]
    enc = dataset.fit_ordinal_encoder(rows[:2], SPEC3)
    once = dataset.apply_encoder(rows, enc, SPEC3)
    twice = dataset.apply_encoder(once, enc, SPEC3)
    assert np.array_equal(once, twice)


def test_encoder_numeric_columns_untouched():
    rows = [["0.25", "tcp", "7"], ["0.75", "udp", "9"]]
    enc = dataset.fit_ordinal_encoder(rows, SPEC3)
    encoded = dataset.apply_encoder(rows, enc, SPEC3)
    assert encoded[:, 0].tolist() == [0.25, 0.75]
    assert encoded[:, 2].tolist() == [7.0, 9.0]


def test_encoder_rejects_unparseable_numeric():
    rows = [["abc", "tcp", "1"]]
    enc = dataset.fit_ordinal_encoder(rows, SPEC3)
    with pytest.raises(DataFormatError, match="column 0"):
        dataset.apply_encoder(rows, enc, SPEC3)


# ---------------------------------------------------------------------------
# Normalization


def test_minmax_worked_example():
    values = np.array([[2.0], [4.0], [6.0]])
    params = dataset.fit_minmax(values)
    assert dataset.apply_minmax(values, params)[:, 0].tolist() == [0.0, 0.5, 1.0]


def test_minmax_constant_column_zeroed():
    values = np.array([[5.0], [5.0], [5.0]])
    params = dataset.fit_minmax(values)
    assert dataset.apply_minmax(values, params)[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_minmax_clips_out_of_range():
    params = dataset.fit_minmax(np.array([[2.0], [6.0]]))
    out = dataset.apply_minmax(np.array([[8.0], [0.0]]), params)
    assert out[:, 0].tolist() == [1.0, 0.0]


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=3),
        min_size=1, max_size=20,
    )
)
def test_minmax_output_always_unit_interval(data):
    values = np.array(data)
    params = dataset.fit_minmax(values)
    out = dataset.apply_minmax(values, params)
    assert out.min() >= 0.0 and out.max() <= 1.0


# ---------------------------------------------------------------------------
# Splitting and subsampling


def make_table(rows=50, seed=3):
    rng = np.random.default_rng(seed)
    values = rng.random((rows, 4))
    labels = rng.integers(0, 2, size=rows)
    if labels.sum() == 0:
        labels[0] = 1
    if labels.sum() == rows:
        labels[0] = 0
    return dataset.FeatureTable(values, labels)


def test_split_validation_floor_and_cover():
    table = make_table(rows=23)
    split = dataset.split_validation(table, 0.2, seed=9)
    assert len(split.validation_rows) == 4  # floor(23 * 0.2)
    merged = np.concatenate([split.train_rows, split.validation_rows])
    assert np.array_equal(np.sort(merged), np.arange(23))
    assert len(np.intersect1d(split.train_rows, split.validation_rows)) == 0


def test_split_validation_deterministic():
    table = make_table()
    a = dataset.split_validation(table, 0.2, seed=4)
    b = dataset.split_validation(table, 0.2, seed=4)
    c = dataset.split_validation(table, 0.2, seed=5)
    assert np.array_equal(a.validation_rows, b.validation_rows)
    assert not np.array_equal(a.validation_rows, c.validation_rows)


def test_split_validation_bad_fraction():
    table = make_table()
    for fraction in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ConfigurationError):
            dataset.split_validation(table, fraction)


def test_split_validation_degenerate_rows():
    with pytest.raises(ConfigurationError, match="degenerate"):
        dataset.split_validation(make_table(rows=3), 0.2)


def test_subsample_size_and_identity():
    table = make_table(rows=60)
    smaller = dataset.subsample(table, 20, seed=1)
    assert smaller.row_count == 20
    assert dataset.subsample(table, 60, seed=1) is table
    assert dataset.subsample(table, 200, seed=1) is table


def test_subsample_stratified_proportions():
    labels = np.array([1] * 20 + [0] * 80)
    table = dataset.FeatureTable(np.random.default_rng(0).random((100, 3)), labels)
    out = dataset.subsample(table, 50, seed=2)
    assert out.row_count == 50
    assert abs(int(out.labels.sum()) - 10) <= 1  # 20% of 50


def test_subsample_preserves_row_order():
    table = make_table(rows=40, seed=8)
    out = dataset.subsample(table, 15, seed=3)
    # kept rows appear in their original relative order
    rows = [table.values.tolist().index(r.tolist()) for r in out.values]
    assert rows == sorted(rows)


def test_subsample_single_class_stratified_errors():
    table = dataset.FeatureTable(np.zeros((10, 2)), np.zeros(10, dtype=np.int8))
    with pytest.raises(ConfigurationError, match="both classes"):
        dataset.subsample(table, 5, seed=0)
    out = dataset.subsample(table, 5, seed=0, stratified=False)
    assert out.row_count == 5


def test_subsample_deterministic():
    table = make_table(rows=80, seed=5)
    a = dataset.subsample(table, 30, seed=7)
    b = dataset.subsample(table, 30, seed=7)
    assert np.array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# FeatureTable validation


def test_feature_table_validation():
    with pytest.raises(DataFormatError):
        dataset.FeatureTable(np.array([1.0, 2.0]), np.array([0, 1]))
    with pytest.raises(DataFormatError):
        dataset.FeatureTable(np.array([[1.5]]), np.array([0]))
    with pytest.raises(DataFormatError):
        dataset.FeatureTable(np.array([[np.nan]]), np.array([0]))
    with pytest.raises(DataFormatError):
        dataset.FeatureTable(np.array([[0.5]]), np.array([2]))
    with pytest.raises(DataFormatError):
        dataset.FeatureTable(np.array([[0.5]]), np.array([0, 1]))


# ---------------------------------------------------------------------------
# End-to-end pipeline


def demo_files(tmp_path, categorical=True, train_rows=200, test_rows=120):
    train, test = synth.two_signal_pair(train_rows, test_rows,
                                        noise_features=3, seed=19)
    spec = synth.write_demo_csv(train, str(tmp_path / "train.csv"),
                                categorical=categorical)
    synth.write_demo_csv(test, str(tmp_path / "test.csv"), categorical=categorical)
    return spec, str(tmp_path / "train.csv"), str(tmp_path / "test.csv")


def test_load_dataset_end_to_end(tmp_path):
    spec, train_path, test_path = demo_files(tmp_path)
    pre = dataset.load_dataset(spec, train_path, test_path)
    assert pre.train.row_count == 200
    assert pre.test.row_count == 120
    assert pre.train.feature_count == spec.feature_count
    assert pre.train.values.min() >= 0.0 and pre.train.values.max() <= 1.0
    assert pre.test.values.min() >= 0.0 and pre.test.values.max() <= 1.0
    assert pre.train_rows_dropped == 0 and pre.test_rows_dropped == 0


def test_load_dataset_deterministic(tmp_path):
    spec, train_path, test_path = demo_files(tmp_path)
    a = dataset.load_dataset(spec, train_path, test_path)
    b = dataset.load_dataset(spec, train_path, test_path)
    assert np.array_equal(a.train.values, b.train.values)
    assert np.array_equal(a.train.labels, b.train.labels)
    assert np.array_equal(a.test.values, b.test.values)


def test_load_dataset_normalizer_fit_on_train_only(tmp_path):
    spec, train_path, test_path = demo_files(tmp_path, categorical=False)
    pre = dataset.load_dataset(spec, train_path, test_path)
    raw_train = dataset.load_csv(train_path, spec)
    feats, _ = dataset.split_features_labels(raw_train, spec)
    encoded = dataset.apply_encoder(feats, pre.encoder, spec)
    assert np.array_equal(pre.normalizer.col_min, encoded.min(axis=0))
    assert np.array_equal(pre.normalizer.col_max, encoded.max(axis=0))


# ---------------------------------------------------------------------------
# Table persistence


def test_save_load_table_round_trip(tmp_path):
    table = make_table(rows=30, seed=12)
    base = str(tmp_path / "snapshot")
    dataset.save_table(table, base)
    loaded = dataset.load_table(base)
    assert np.array_equal(loaded.values, table.values)
    assert np.array_equal(loaded.labels, table.labels)


def test_load_table_detects_sidecar_mismatch(tmp_path):
    table = make_table(rows=30, seed=12)
    base = str(tmp_path / "snapshot")
    _, meta_path = dataset.save_table(table, base)
    import json

    meta = json.loads(open(meta_path, encoding="utf-8").read())
    meta["rows"] = 31
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh)
    with pytest.raises(DataFormatError):
        dataset.load_table(base)

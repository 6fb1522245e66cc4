import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmee.data_contamination import (
    ContaminationSpec,
    LabeledDataset,
    contaminate,
    generate_toy,
    inject_attribute_outliers,
    inject_label_outliers,
    load_csv,
    normalize,
    one_vs_all,
    read_csv_table,
    split,
    write_csv,
)
from rmee.exceptions import InvalidInputError, InvalidParameterError


def small(n=10, d=3, seed=0, labels=None):
    rng = np.random.default_rng(seed)
    y = labels if labels is not None else (np.arange(n) % 2)
    return LabeledDataset(rng.normal(size=(n, d)), y)


# -- toy ---------------------------------------------------------------------

def test_toy_defaults():
    train, test, w = generate_toy(rng=0)
    assert train.features.shape == (1000, 20) and test.features.shape == (1000, 20)
    assert w.shape == (20,)


@given(st.integers(0, 10_000), st.floats(-1, 1))
def test_toy_labels_follow_true_direction(seed, shift):
    train, test, w = generate_toy(50, 30, 4, shift, seed)
    for ds in (train, test):
        np.testing.assert_array_equal(ds.labels, (ds.features @ w >= 0).astype(int))


def test_toy_balanced_in_expectation():
    ones = [generate_toy(1000, 0, 20, 0.0, s)[0].labels.mean() for s in range(100)]
    assert np.mean(ones) == pytest.approx(0.5, abs=0.03)


def test_toy_unbalanced_ratio():
    # [PAPER] 629.2 : 370.8 on average with mean shifted to 0.4
    major = [max(generate_toy(1000, 0, 20, 0.4, s)[0].class_counts()) for s in range(100)]
    assert np.mean(major) == pytest.approx(629.2, abs=25)


def test_toy_rejects_zero_dim():
    with pytest.raises(InvalidParameterError):
        generate_toy(d=0)


def test_toy_deterministic():
    a, b = generate_toy(20, 20, 3, 0.0, 5), generate_toy(20, 20, 3, 0.0, 5)
    assert a[0].features.tobytes() == b[0].features.tobytes()


# -- contamination --------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        ContaminationSpec("noise", 0.1)
    with pytest.raises(InvalidParameterError):
        ContaminationSpec("attribute", 1.5)
    with pytest.raises(InvalidParameterError):
        ContaminationSpec("attribute", 0.1, attribute_cov_scale=0.0)
    assert ContaminationSpec("label_min_to_maj", 0.1).parameter == "min_to_maj"
    assert ContaminationSpec("attribute", 0.1, 5.0).parameter == 5.0


def test_attribute_zero_proportion_unchanged():
    ds = small()
    out = inject_attribute_outliers(ds, ContaminationSpec("attribute", 0.0), 1)
    assert out.features.tobytes() == ds.features.tobytes()


def test_attribute_full_proportion():
    ds = small()
    out = inject_attribute_outliers(ds, ContaminationSpec("attribute", 1.0), 1)
    assert np.all(np.any(out.features != ds.features, axis=1))
    np.testing.assert_array_equal(out.labels, ds.labels)


def test_attribute_half_of_ten():
    ds = small(10)
    out = inject_attribute_outliers(ds, ContaminationSpec("attribute", 0.5), 3)
    assert np.sum(np.any(out.features != ds.features, axis=1)) == 5


def test_attribute_scale():
    ds = LabeledDataset(np.zeros((20000, 2)), np.zeros(20000))
    out = inject_attribute_outliers(ds, ContaminationSpec("attribute", 1.0, 100.0), 0)
    assert out.features.std() == pytest.approx(10.0, rel=0.02)
    assert abs(out.features.mean()) < 0.2


@given(st.integers(1, 60), st.floats(0, 1), st.integers(0, 1000))
def test_attribute_complement_untouched(n, p, seed):
    ds = small(n, seed=seed)
    out = inject_attribute_outliers(ds, ContaminationSpec("attribute", p), seed)
    changed = np.any(out.features != ds.features, axis=1)
    assert changed.sum() == int(np.floor(p * n))
    assert out.labels.tobytes() == ds.labels.tobytes()
    assert out.features[~changed].tobytes() == ds.features[~changed].tobytes()


def test_label_zero_proportion_unchanged():
    ds = small()
    assert inject_label_outliers(ds, ContaminationSpec("label_maj_to_min", 0.0), 0).labels.tolist() == ds.labels.tolist()


def test_label_thirty_percent_of_hundred():
    y = np.r_[np.zeros(100, int), np.ones(40, int)]
    ds = small(140, labels=y)
    out = inject_label_outliers(ds, ContaminationSpec("label_maj_to_min", 0.3), 0)
    flipped = out.labels != ds.labels
    assert flipped.sum() == 30
    assert np.all(ds.labels[flipped] == 0)
    assert out.features.tobytes() == ds.features.tobytes()
    out = inject_label_outliers(ds, ContaminationSpec("label_min_to_maj", 0.5), 0)
    flipped = out.labels != ds.labels
    assert flipped.sum() == 20 and np.all(ds.labels[flipped] == 1)


def test_label_empty_source():
    ds = small(6, labels=np.zeros(6, int))
    with pytest.raises(InvalidInputError):
        inject_label_outliers(ds, ContaminationSpec("label_min_to_maj", 0.3), 0)


def test_label_modes_equivalent_on_balanced_toy():
    # which class is the source is a coin flip in either direction, and the
    # flip rate inside the source class is the same
    for mode in ("label_maj_to_min", "label_min_to_maj"):
        source0, rates = [], []
        for s in range(200):
            train, _, _ = generate_toy(200, 0, 5, 0.0, s)
            out = contaminate(train, ContaminationSpec(mode, 0.2), s)
            flipped = out.labels != train.labels
            src = int(train.labels[flipped][0])
            source0.append(src == 0)
            rates.append(flipped.sum() / np.sum(train.labels == src))
        assert np.mean(source0) == pytest.approx(0.5, abs=0.1)
        assert np.mean(rates) == pytest.approx(0.2, abs=0.01)


def test_wrong_mode_rejected():
    with pytest.raises(InvalidParameterError):
        inject_label_outliers(small(), ContaminationSpec("attribute", 0.1))
    with pytest.raises(InvalidParameterError):
        inject_attribute_outliers(small(), ContaminationSpec("label_maj_to_min", 0.1))


def test_contaminate_uses_spec_seed():
    ds = small(20)
    spec = ContaminationSpec("attribute", 0.3, seed=4)
    assert contaminate(ds, spec).features.tobytes() == contaminate(ds, spec).features.tobytes()


# -- CSV -------------------------------------------------------------------

def test_load_three_rows(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("1.0,2.0,M\n3.0,4.0,B\n5.0,6.0,M\n")
    ds = load_csv(p, -1, "M")
    assert ds.labels.tolist() == [1, 0, 1]
    assert ds.features.tolist() == [[1, 2], [3, 4], [5, 6]]


def test_header_autodetected(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b,label\n1,2,M\n3,4,B\n")
    assert len(load_csv(p, -1, "M")) == 2
    p.write_text("label,a\nM,1\nB,2\n")
    assert load_csv(p, 0, "M").features.ravel().tolist() == [1.0, 2.0]


@pytest.mark.parametrize("body,where", [("1,x,M\n", ":1: column 2"), ("1,,M\n", ":1: column 2"),
                                        ("1,nan,M\n", ":1: column 2"), ("1,2,M\n3,M\n", ":2:")])
def test_csv_diagnostics(tmp_path, body, where):
    p = tmp_path / "x.csv"
    p.write_text(body)
    with pytest.raises(InvalidInputError, match=where):
        load_csv(p, -1, "M", header=False)


def test_bcw_fixture(bcw_path):
    # [PAPER] 699 rows, 9 attributes, 458 : 241
    ds = load_csv(bcw_path, -1, "malignant")
    assert ds.features.shape == (699, 9)
    assert ds.class_counts() == (458, 241)


def test_iris_one_vs_all(iris_path):
    table = read_csv_table(iris_path, -1)
    ds = one_vs_all(table, "setosa")
    assert ds.class_counts() == (100, 50)
    assert sum(one_vs_all(table, c).labels.sum() for c in table.class_names) == 150
    with pytest.raises(InvalidInputError):
        one_vs_all(table, "rose")


def test_one_vs_all_binary_identity(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("1,1\n2,0\n3,1\n")
    ds = load_csv(p, -1, "1")
    assert one_vs_all(read_csv_table(p, -1), "1").labels.tolist() == ds.labels.tolist() == [1, 0, 1]


def test_csv_roundtrip(tmp_path):
    train, _, _ = generate_toy(15, 0, 3, 0.0, 2)
    p = tmp_path / "toy.csv"
    write_csv(train, p)
    back = load_csv(p, -1, "1")
    assert back.features.tobytes() == train.features.tobytes()
    assert back.labels.tolist() == train.labels.tolist()


def test_read_without_label(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("a,b\n1,2\n3,4\n")
    assert read_csv_table(p, None).features.tolist() == [[1, 2], [3, 4]]


# -- normalize and split ---------------------------------------------------------

def test_normalize_train_statistics():
    rng = np.random.default_rng(0)
    train = LabeledDataset(rng.normal(5, 3, size=(50, 4)), np.arange(50) % 2)
    test = LabeledDataset(rng.normal(5, 3, size=(30, 4)), np.arange(30) % 2)
    tr, te = normalize(train, test)
    np.testing.assert_allclose(tr.features.mean(0), 0, atol=1e-10)
    np.testing.assert_allclose(tr.features.std(0), 1, atol=1e-10)
    assert not np.allclose(te.features.mean(0), 0, atol=1e-3)
    again, _ = normalize(tr)
    np.testing.assert_allclose(again.features, tr.features, atol=1e-10)


def test_normalize_constant_column():
    X = np.c_[np.full(6, 3.0), np.arange(6.0)]
    tr, _ = normalize(LabeledDataset(X, np.arange(6) % 2))
    np.testing.assert_array_equal(tr.features[:, 0], 0.0)
    assert tr.normalization[1][0] == 1.0


def test_split_sizes_and_partition():
    ds = small(699, d=2)
    tr, te = split(ds, 2 / 3, 0)
    assert (len(tr), len(te)) == (466, 233)
    rows = {r.tobytes() for r in ds.features}
    got = [r.tobytes() for r in tr.features] + [r.tobytes() for r in te.features]
    assert set(got) == rows and len(got) == len(rows)


def test_split_deterministic():
    ds = small(40)
    a, b = split(ds, 0.5, 3), split(ds, 0.5, 3)
    assert a[0].features.tobytes() == b[0].features.tobytes()


@pytest.mark.parametrize("f", [0.0, 1.0, -0.5])
def test_split_rejects_fraction(f):
    with pytest.raises(InvalidParameterError):
        split(small(), f, 0)


def test_dataset_validation():
    with pytest.raises(InvalidInputError):
        LabeledDataset(np.zeros((3, 2)), [0, 1])
    with pytest.raises(InvalidInputError):
        LabeledDataset(np.zeros((2, 2)), [0, 2])

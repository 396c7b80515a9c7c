from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cardsvm import Dataset, DomainError, FormatError, load_bundled, load_csv, load_sparse
from cardsvm import standardize, subsample
from cardsvm.dataset import train_test_split


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_basic_mapping(tmp_path):
    p = write(tmp_path, "d.csv", "f1,f2,label\n1,2,a\n3,4,b\n5,6,a\n")
    d = load_csv(p, "label", "a")
    assert (d.m, d.n) == (3, 2)
    assert d.labels.tolist() == [1.0, -1.0, 1.0]
    assert d.feature_names == ("f1", "f2")
    np.testing.assert_array_equal(d.features, [[1, 2], [3, 4], [5, 6]])


def test_csv_non_numeric_names_row(tmp_path):
    p = write(tmp_path, "d.csv", "f1,f2,label\n1,2,a\n3,oops,b\n")
    with pytest.raises(FormatError, match="row 2"):
        load_csv(p, "label", "a")


def test_csv_three_classes(tmp_path):
    p = write(tmp_path, "d.csv", "f1,label\n1,a\n2,b\n3,c\n")
    with pytest.raises(DomainError):
        load_csv(p, "label")


def test_csv_missing_rows_dropped(tmp_path):
    p = write(tmp_path, "d.csv", "f1,f2,label\n1,?,a\n3,4,b\n5,,a\n7,8,a\n")
    d = load_csv(p, "label", "a")
    assert d.m == 2
    np.testing.assert_array_equal(d.features, [[3, 4], [7, 8]])


def test_csv_missing_label_column(tmp_path):
    p = write(tmp_path, "d.csv", "f1,y\n1,a\n")
    with pytest.raises(FormatError):
        load_csv(p, "label")


def test_csv_single_class_rejected(tmp_path):
    p = write(tmp_path, "d.csv", "f1,label\n1,a\n2,a\n")
    with pytest.raises(DomainError):
        load_csv(p, "label")


def test_sparse_row_layout(tmp_path):
    p = write(tmp_path, "d.svm", "+1 1:0.5 3:2.0\n-1\n")
    d = load_sparse(p, n_hint=3)
    np.testing.assert_array_equal(d.features, [[0.5, 0.0, 2.0], [0.0, 0.0, 0.0]])
    assert d.labels.tolist() == [1.0, -1.0]


def test_sparse_index_over_hint(tmp_path):
    p = write(tmp_path, "d.svm", "+1 1:0.5 4:2.0\n-1 1:1\n")
    with pytest.raises(FormatError, match="row 1"):
        load_sparse(p, n_hint=3)


def test_sparse_bad_token(tmp_path):
    p = write(tmp_path, "d.svm", "+1 1:0.5\n-1 2=3\n")
    with pytest.raises(FormatError, match="row 2"):
        load_sparse(p)


@pytest.mark.parametrize("name,shape", [
    ("sonar", (208, 60)),
    ("wdbc", (569, 30)),
    ("wisconsin", (683, 9)),
    ("pima", (768, 8)),
    ("ionosphere", (351, 33)),
])
def test_bundled_sizes_match_published_table(name, shape):
    d = load_bundled(name)
    assert (d.m, d.n) == shape


def test_bundled_heart_subsample():
    d = subsample(standardize(load_bundled("heart")), 200, 0)
    assert (d.m, d.n) == (200, 13)


def test_wholesale_not_bundled():
    pytest.skip("Wholesale data is not bundled with the package; no loader target to test")


def test_dataset_validation():
    with pytest.raises(DomainError):
        Dataset(np.zeros((2, 1)), np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        Dataset(np.zeros((2, 1)), np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        Dataset(np.array([[np.nan], [0.0]]), np.array([1.0, -1.0]))


def test_standardize_examples():
    d = Dataset(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]), np.array([1.0, -1.0, 1.0]))
    z = standardize(d).features
    np.testing.assert_allclose(z[:, 0], [-1.0, 0.0, 1.0])
    assert z[:, 0].std(ddof=1) == pytest.approx(1.0)
    np.testing.assert_array_equal(z[:, 1], 0.0)


matrices = arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False))


@given(matrices)
def test_standardize_idempotent_and_finite(x):
    y = np.ones(x.shape[0])
    y[0] = -1.0
    once = standardize(Dataset(x, y))
    twice = standardize(once)
    assert np.all(np.isfinite(once.features))
    np.testing.assert_allclose(twice.features, once.features, atol=1e-12)


def test_subsample_full_and_determinism():
    d = load_bundled("toy")
    assert subsample(d, d.m, 3) is d
    a = subsample(d, 12, 7)
    b = subsample(d, 12, 7)
    np.testing.assert_array_equal(a.features, b.features)
    with ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(lambda _: subsample(d, 12, 7).features, range(8)))
    for o in outs:
        np.testing.assert_array_equal(o, a.features)


@given(st.integers(2, 40), st.integers(0, 2**31))
def test_subsample_keeps_both_classes(k, seed):
    d = load_bundled("toy")
    s = subsample(d, k, seed)
    assert s.m == k
    assert set(s.labels.tolist()) == {-1.0, 1.0}
    rows = [int(np.flatnonzero((d.features == r).all(axis=1))[0]) for r in s.features]
    assert rows == sorted(rows) and len(set(rows)) == k


def test_subsample_too_small():
    with pytest.raises(DomainError):
        subsample(load_bundled("toy"), 1, 0)


def test_train_test_split_partitions():
    d = load_bundled("toy")
    tr, te = train_test_split(d, 0.25, 0)
    assert tr.m + te.m == d.m and te.m == 10
    joined = np.vstack([tr.features, te.features])
    assert sorted(map(tuple, joined)) == sorted(map(tuple, d.features))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tabsearch.errors import IngestionError
from tabsearch.reporting import (
    COVERTYPE_HEADER,
    balanced_subsample,
    load_csv,
    make_covertype_like,
    split_sizes,
    write_covertype_like,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("n, sizes", [(581_012, (244_025, 145_253, 191_734)), (100, (42, 25, 33))])
def test_split_sizes(n, sizes):
    assert split_sizes(n) == sizes


@given(st.integers(0, 10**7))
def test_split_sizes_sum(n):
    a, b, c = split_sizes(n)
    assert a + b + c == n and min(a, b, c) >= 0
    assert a == (42 * n) // 100 and b == (25 * n) // 100


def numeric_csv(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(5, 3, size=(n, 3))
    y = rng.integers(0, 3, n)
    lines = ["a,b,label,c"] + [f"{float(r[0])!r},{float(r[1])!r},{l},{float(r[2])!r}" for r, l in zip(x, y)]
    return "\n".join(lines) + "\n", x, y


def test_load_csv_splits_and_standardization(tmp_path):
    text, x, y = numeric_csv(100)
    ds = load_csv(write(tmp_path, text), "label", split_seed=3)
    assert (len(ds.train), len(ds.valid), len(ds.test)) == (42, 25, 33)
    allrows = np.concatenate([ds.train, ds.valid, ds.test])
    assert sorted(allrows) == list(range(100))
    np.testing.assert_allclose(ds.features[ds.train].mean(axis=0), 0, atol=1e-9)
    np.testing.assert_allclose(ds.features[ds.train].std(axis=0), 1, atol=1e-9)
    assert ds.feature_names == ["a", "b", "c"]
    np.testing.assert_array_equal(ds.labels, y)
    np.testing.assert_allclose(ds.features * ds.scale + ds.mean, x, rtol=1e-12)


def test_load_csv_deterministic_split(tmp_path):
    text, _, _ = numeric_csv(60)
    p = write(tmp_path, text)
    a, b = load_csv(p, "label", 5), load_csv(p, "label", 5)
    np.testing.assert_array_equal(a.train, b.train)
    assert not np.array_equal(a.train, load_csv(p, "label", 6).train)


def test_one_hot_text_columns(tmp_path):
    text = "color,size,y\nred,1,yes\nblue,2,no\nred,3,no\ngreen,4,yes\n"
    ds = load_csv(write(tmp_path, text), "y")
    assert ds.feature_names == ["color=blue", "color=green", "color=red", "size"]
    assert ds.classes == ["no", "yes"]
    raw = ds.features * ds.scale + ds.mean
    np.testing.assert_allclose(raw[:, :3], [[0, 0, 1], [1, 0, 0], [0, 0, 1], [0, 1, 0]], atol=1e-12)


def test_categorical_override(tmp_path):
    text = "zone,y\n1,a\n2,b\n1,b\n3,a\n"
    ds = load_csv(write(tmp_path, text), "y", categorical_columns=["zone"])
    assert ds.feature_names == ["zone=1", "zone=2", "zone=3"]


def test_numeric_labels_sorted_numerically(tmp_path):
    text = "x,y\n" + "".join(f"{i},{l}\n" for i, l in enumerate([10, 2, 2, 10, 7]))
    ds = load_csv(write(tmp_path, text), "y")
    assert ds.classes == ["2", "7", "10"]
    np.testing.assert_array_equal(ds.labels, [2, 0, 0, 2, 1])


def test_ingestion_errors(tmp_path):
    with pytest.raises(IngestionError, match="not in header"):
        load_csv(write(tmp_path, "a,b\n1,0\n2,1\n"), "label")
    with pytest.raises(IngestionError, match="line 3"):
        load_csv(write(tmp_path, "a,y\n1,0\nfoo,1\n2,0\n"), "y")
    with pytest.raises(IngestionError, match="single class"):
        load_csv(write(tmp_path, "a,y\n1,0\n2,0\n"), "y")
    with pytest.raises(IngestionError, match="expected 2 fields"):
        load_csv(write(tmp_path, "a,y\n1,0\n2\n"), "y")
    with pytest.raises(IngestionError):
        load_csv(tmp_path / "missing.csv", "y")
    with pytest.raises(IngestionError):
        load_csv(write(tmp_path, ""), "y")


def test_balanced_subsample():
    labels = np.array([0] * 50 + [1] * 30 + [2] * 15)
    idx = balanced_subsample(labels, 30, seed=0)
    assert np.bincount(labels[idx]).tolist() == [10, 10, 10]
    labels = np.array([0] * 50 + [1] * 30 + [2] * 5)
    idx = balanced_subsample(labels, 40, seed=0)
    assert np.bincount(labels[idx]).tolist() == [18, 17, 5]
    assert len(set(idx)) == len(idx)
    with pytest.raises(IngestionError):
        balanced_subsample(labels, 100)


def test_covertype_like_layout(tmp_path):
    x, y = make_covertype_like(2000, seed=1)
    assert x.shape == (2000, 54) and set(np.unique(y)) == set(range(1, 8))
    np.testing.assert_array_equal(x[:, 10:14].sum(axis=1), 1)
    np.testing.assert_array_equal(x[:, 14:].sum(axis=1), 1)
    p = tmp_path / "cov.csv"
    write_covertype_like(p, 700, seed=1)
    ds = load_csv(p, "Cover_Type")
    assert ds.n_features == 54 and ds.n_classes == 7 and len(ds.labels) == 700
    assert np.bincount(ds.labels).tolist() == [100] * 7
    assert p.read_text().splitlines()[0].split(",") == COVERTYPE_HEADER

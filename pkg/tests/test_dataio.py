import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rmmd.dataio import (LabeledDataset, ParseError, read_csv, read_libsvm, standardize,
                         subsample_classes, write_csv)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_read_csv_classes(tmp_path):
    p = write(tmp_path, "d.csv", "a,b,cls\n1,2,x\n3,4,x\n5,6,y\n")
    ds = read_csv(p, "cls")
    assert ds.points.tolist() == [[1, 2], [3, 4], [5, 6]]
    assert {c: len(i) for c, i in ds.class_index.items()} == {"x": 2, "y": 1}


def test_read_csv_index_and_no_header(tmp_path):
    p = write(tmp_path, "d.csv", "x,1,2\ny,3,4\n")
    ds = read_csv(p, 0, has_header=False)
    assert ds.points.tolist() == [[1, 2], [3, 4]] and ds.labels.tolist() == ["x", "y"]


def test_read_csv_errors(tmp_path):
    with pytest.raises(ParseError):
        read_csv(write(tmp_path, "e.csv", ""), "cls")
    with pytest.raises(ParseError, match=r"row 2, column b"):
        read_csv(write(tmp_path, "n.csv", "a,b,cls\n1,2,x\n3,oops,x\n"), "cls")
    with pytest.raises(ParseError, match="row 1 has 2 fields"):
        read_csv(write(tmp_path, "r.csv", "a,b,cls\n1,x\n"), "cls")
    with pytest.raises(ParseError, match="missing label column"):
        read_csv(write(tmp_path, "m.csv", "a,b\n1,2\n"), "cls")


def test_read_libsvm(tmp_path):
    ds = read_libsvm(write(tmp_path, "a.libsvm", "3 1:0.5 784:1.0\n5\n"))
    assert ds.points.shape == (2, 784)
    assert ds.points[0, 0] == 0.5 and ds.points[0, 783] == 1.0 and ds.points[0, 1:783].sum() == 0
    assert ds.labels.tolist() == ["3", "5"] and not ds.points[1].any()


@pytest.mark.parametrize("line", ["1 2:1 1:1", "1 2:1 2:3", "1 a:1", "1 3", "1 0:2"])
def test_read_libsvm_errors(tmp_path, line):
    with pytest.raises(ParseError):
        read_libsvm(write(tmp_path, "b.libsvm", line + "\n"))


def make(n_per, classes=("a", "b")):
    labels = np.array([c for c in classes for _ in range(n_per)], dtype=object)
    pts = np.arange(labels.size * 2, dtype=float).reshape(-1, 2)
    return LabeledDataset(pts, labels)


def test_subsample_classes():
    ds = make(100)
    sub = subsample_classes(ds, 10, seed=1)
    assert sub.n == 20 and all(len(i) == 10 for i in sub.class_index.values())
    again = subsample_classes(ds, 10, seed=1)
    assert np.array_equal(sub.points, again.points)
    with pytest.warns(UserWarning):
        big = subsample_classes(ds, 500, seed=1)
    assert np.array_equal(big.points, ds.points) and set(big.short_classes) == {"a", "b"}


def test_standardize():
    ds = standardize(LabeledDataset(np.array([[1.0, 5.0], [3.0, 5.0]]), np.array(["a", "b"], object)))
    assert ds.points.tolist() == [[-1.0, 0.0], [1.0, 0.0]]


@pytest.mark.property
@settings(max_examples=25)
@given(pts=arrays(float, st.tuples(st.integers(1, 15), st.integers(1, 4)),
                  elements=st.floats(-1e300, 1e300, allow_nan=False)),
       seed=st.integers(0, 100))
def test_csv_round_trip_and_index(tmp_path_factory, pts, seed):
    rng = np.random.default_rng(seed)
    labels = np.array(rng.choice(["p", "q", "r"], pts.shape[0]), dtype=object)
    path = tmp_path_factory.mktemp("rt") / "ds.csv"
    write_csv(LabeledDataset(pts, labels), path)
    back = read_csv(path, "label")
    assert np.array_equal(back.points, pts) and back.labels.tolist() == labels.tolist()
    idx = np.sort(np.concatenate(list(back.class_index.values())))
    assert idx.tolist() == list(range(pts.shape[0]))

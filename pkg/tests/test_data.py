import numpy as np
import pytest

from spinn.data import DataError, Dataset, read_csv, write_csv
from spinn.losses import Continuous

from conftest import KINDS, make_dataset


@pytest.mark.parametrize("kind", KINDS)
def test_csv_roundtrip(kind, tmp_path):
    ds = make_dataset(kind, n=25, d=4)
    f = tmp_path / "d.csv"
    write_csv(ds, f)
    back = read_csv(f, kind)
    assert back.equals(ds) and back.kind == kind


def test_header_layout(tmp_path):
    f = tmp_path / "s.csv"
    write_csv(make_dataset("survival", n=5, d=3), f)
    assert f.read_text().splitlines()[0] == "x1,x2,x3,time,event"


def test_y_column_defaults_to_regression(tmp_path):
    f = tmp_path / "c.csv"
    write_csv(make_dataset("classification", n=10, d=2), f)
    assert read_csv(f).kind == "regression"
    assert read_csv(f, "classification").kind == "classification"


@pytest.mark.parametrize("text", [
    "x1,x2,y\n1,2\n",
    "x1,x3,y\n1,2,3\n",
    "x1,time,event\n1,2,0.5\n",
    "x1,time,event\n1,-2,1\n",
    "x1,y\n1,abc\n",
    "x1,y\n1,nan\n",
    "",
])
def test_bad_files(text, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(DataError):
        read_csv(f)


def test_bad_binary_labels(tmp_path):
    f = tmp_path / "b.csv"
    f.write_text("x1,y\n1,0\n2,3\n")
    with pytest.raises(DataError):
        read_csv(f, "classification")


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_csv(tmp_path / "nope.csv")


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 2)), Continuous(np.zeros(4)))
    with pytest.raises(DataError):
        Dataset(np.array([[np.inf]]), Continuous(np.zeros(1)))

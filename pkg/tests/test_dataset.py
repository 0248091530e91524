import csv
import random

import numpy as np
import pytest

from vflsim.dataset import (
    ingest_dataset,
    records_from_matrix,
    split_records,
    synthetic_blobs,
    write_sensor_csv,
)
from vflsim.errors import MalformedRow, TooFewClasses
from vflsim.fixedpoint import SCALE


def write_csv(path, rows, header=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(header)
        writer.writerows(rows)


def test_malformed_row(tmp_path):
    path = tmp_path / "bad.csv"
    rows = [[str(v) for v in range(10)] for _ in range(5)]
    rows[3][2] = "not-a-number"
    write_csv(path, rows)
    with pytest.raises(MalformedRow) as info:
        ingest_dataset(path)
    assert info.value.line_no == 4


def test_too_few_classes(tmp_path):
    path = tmp_path / "few.csv"
    rows = [[str(i) for i in range(9)] + [f"c{r % 3}"] for r in range(30)]
    write_csv(path, rows)
    with pytest.raises(TooFewClasses):
        ingest_dataset(path)


def test_short_row_rejected(tmp_path):
    path = tmp_path / "short.csv"
    write_csv(path, [["1", "2", "3"]])
    with pytest.raises(MalformedRow):
        ingest_dataset(path)


def test_normalization_and_condensing(tmp_path):
    path = tmp_path / "data.csv"
    rng = random.Random(4)
    rows = []
    for r in range(600):
        feats = [rng.uniform(-5, 5) for _ in range(12)]  # extra columns ignored
        rows.append([f"{v:.4f}" for v in feats] + [f"c{r % 7}"])
    write_csv(path, rows, header=[f"f{i}" for i in range(12)] + ["class"])
    train, test = ingest_dataset(path, seed=9)
    records = train + test
    # 7 classes -> top 6 kept; labels mapped to 0..5
    assert {r.label for r in records} == set(range(6))
    assert len(records) < 600
    for rec in records:
        assert len(rec.features) == 9
        for f in rec.features:
            assert 0 <= f.raw < SCALE  # [0, 1) after min-max
    # column minimum maps to encode(0)
    for j in range(9):
        assert min(rec.features[j].raw for rec in records) == 0
    assert abs(len(train) - 0.8 * len(records)) <= 1


def test_split_is_seeded_shuffle():
    recs = records_from_matrix([[i / 100] * 9 for i in range(100)],
                               [i % 6 for i in range(100)])
    a_train, a_test = split_records(recs, seed=5)
    b_train, b_test = split_records(recs, seed=5)
    assert a_train == b_train and a_test == b_test
    c_train, _ = split_records(recs, seed=6)
    assert c_train != a_train


def oracle_perceptron(train, test, epochs=12):
    """Independent one-vs-rest perceptron, integer-free reference learner."""
    w = np.zeros((6, 10))
    x_train = np.array([[f.raw / SCALE for f in r.features] + [1.0] for r in train])
    y_train = np.array([r.label for r in train])
    for _ in range(epochs):
        for x, y in zip(x_train, y_train):
            pred = int(np.argmax(w @ x))
            if pred != y:
                w[y] += x
                w[pred] -= x
    x_test = np.array([[f.raw / SCALE for f in r.features] + [1.0] for r in test])
    y_test = np.array([r.label for r in test])
    return float((np.argmax(x_test @ w.T, axis=1) == y_test).mean())


def test_synthetic_blobs_are_separable():
    train, test = synthetic_blobs(4000, seed=3)
    assert oracle_perceptron(train, test) > 0.9
    assert {r.label for r in train} == set(range(6))


def test_synthetic_blobs_deterministic():
    a = synthetic_blobs(500, seed=8)
    b = synthetic_blobs(500, seed=8)
    assert a == b


def test_sensor_csv_roundtrip(tmp_path):
    path = write_sensor_csv(tmp_path / "sensor.csv", 3000, seed=2)
    train, test = ingest_dataset(path, seed=2)
    assert len(train) + len(test) < 3000  # only top-6 classes kept
    assert len(train) > 1000
    assert {r.label for r in train} == set(range(6))

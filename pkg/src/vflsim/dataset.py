"""Dataset ingestion and synthetic fixtures.

The ingest path condenses an arbitrary sensor CSV the same way for every
source: keep the first nine feature columns, keep only the six most frequent
classes (mapped to indices 0..5 by descending frequency), min-max normalize
each kept column into [0, 1), encode to fixed point, and split 80/20 by a
seeded shuffle.

Two generators back the experiments: well-separated Gaussian blobs for the
learning-sanity fixture, and a wide overlapping-cluster sensor table (45
features, 19 imbalanced classes) exercising the full condensing path at a
realistic difficulty.
"""

from __future__ import annotations

import csv
import random

import numpy as np

from .commitments import DataRecord
from .errors import MalformedRow, TooFewClasses
from .fixedpoint import Fixed, SCALE

NUM_FEATURES = 9
NUM_CLASSES = 6


def _encode_unit(value: float) -> Fixed:
    """Encode a normalized value into [0, 1) on the fixed-point grid."""
    raw = int(value * SCALE)
    return Fixed(min(max(raw, 0), SCALE - 1))


def records_from_matrix(features, labels) -> list:
    """Rows of normalized floats in [0,1) plus int labels -> DataRecords."""
    out = []
    for row, label in zip(features, labels):
        out.append(DataRecord(tuple(_encode_unit(v) for v in row[:NUM_FEATURES]),
                              int(label)))
    return out


def split_records(records, seed: int, train_fraction: float = 0.8):
    order = list(records)
    random.Random(seed).shuffle(order)
    cut = int(len(order) * train_fraction)
    return order[:cut], order[cut:]


def ingest_dataset(path, seed: int = 0):
    """Parse a CSV (last column = class), condense, encode, split 80/20.

    Raises MalformedRow for unparsable feature cells and TooFewClasses when
    fewer than six distinct classes remain.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if line_no == 1 and _looks_like_header(cells):
                continue
            if len(cells) < NUM_FEATURES + 1:
                raise MalformedRow(line_no, f"row {line_no} has {len(cells)} columns")
            try:
                feats = [float(c) for c in cells[:NUM_FEATURES]]
            except ValueError as exc:
                raise MalformedRow(line_no, f"row {line_no}: {exc}") from exc
            rows.append((feats, cells[-1].strip()))
    counts = {}
    for _, cls in rows:
        counts[cls] = counts.get(cls, 0) + 1
    if len(counts) < NUM_CLASSES:
        raise TooFewClasses(f"need {NUM_CLASSES} classes, found {len(counts)}")
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:NUM_CLASSES]
    class_index = {cls: i for i, (cls, _) in enumerate(top)}
    kept = [(feats, class_index[cls]) for feats, cls in rows if cls in class_index]

    columns = list(zip(*(feats for feats, _ in kept)))
    lo = [min(col) for col in columns]
    hi = [max(col) for col in columns]
    span = [h - l if h > l else 1.0 for l, h in zip(lo, hi)]
    records = records_from_matrix(
        ([(v - l) / s for v, l, s in zip(feats, lo, span)] for feats, _ in kept),
        (label for _, label in kept),
    )
    return split_records(records, seed)


def _looks_like_header(cells) -> bool:
    try:
        float(cells[0])
        return False
    except ValueError:
        return True


# --- generators ----------------------------------------------------------------

def synthetic_blobs(n_records: int, seed: int = 0):
    """Linearly separable fixture: six tight Gaussian blobs in [0,1)^9.

    Class k sits at 0.5 everywhere except a bump on coordinate k, so all
    class means share the same norm and the argmax model locks onto the
    discriminating coordinate within a few gradient steps.
    """
    rng = np.random.default_rng(seed)
    means = np.full((NUM_CLASSES, NUM_FEATURES), 0.5)
    for k in range(NUM_CLASSES):
        means[k, k] = 0.88
    labels = rng.integers(0, NUM_CLASSES, size=n_records)
    feats = means[labels] + rng.normal(0.0, 0.04, size=(n_records, NUM_FEATURES))
    feats = np.clip(feats, 0.0, 1.0 - 1.0 / SCALE)
    records = records_from_matrix(feats, labels)
    return split_records(records, seed)


def write_sensor_csv(path, n_rows: int, seed: int = 0, n_features: int = 45,
                     n_classes: int = 19, spread: float = 0.25):
    """Emit a wide activity-sensor-style table for the condensing path.

    Classes are mildly imbalanced (geometric), cluster centers overlap in
    proportion to ``spread``, so a linear model tops out well below perfect
    accuracy. Returns the path for convenience.
    """
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.1, 0.9, size=(n_classes, n_features))
    weights = np.array([0.88 ** k for k in range(n_classes)])
    weights /= weights.sum()
    labels = rng.choice(n_classes, size=n_rows, p=weights)
    feats = centers[labels] + rng.normal(0.0, spread, size=(n_rows, n_features))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(n_features)] + ["activity"])
        for row, label in zip(feats, labels):
            writer.writerow([f"{v:.5f}" for v in row] + [f"act{label:02d}"])
    return path

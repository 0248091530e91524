"""Fixed-point arithmetic and the single-layer learner.

Values are signed integers scaled by 2^16 with a strict |raw| < 2^31 guard.
Every truncation floors toward minus infinity (arithmetic shift), and the
same rule applies at every point of the learner, so the native pipeline, the
rational-arithmetic oracle in the tests, and the circuit gadget agree raw
value for raw value.

For field embedding a raw value r maps to the offset residue r + 2^31, which
keeps negative values unambiguous inside circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import EmptyBatch, FixedOverflow, RangeExceeded
from .fields import FIELD_PRIME

SCALE_BITS = 16
SCALE = 1 << SCALE_BITS
RAW_BOUND = 1 << 31
OFFSET = 1 << 31

NUM_FEATURES = 9
NUM_CLASSES = 6


@dataclass(frozen=True)
class Fixed:
    """Signed fixed-point number: real value = raw / 2^16."""

    raw: int

    def __post_init__(self):
        if not -RAW_BOUND < self.raw < RAW_BOUND:
            raise FixedOverflow(f"raw value {self.raw} outside guarded range")

    def __repr__(self):
        return f"Fixed({self.raw} ~ {self.raw / SCALE:.6f})"


ZERO = Fixed(0)
ONE = Fixed(SCALE)
DEFAULT_LEARNING_RATE = Fixed(655)  # encode_fixed(0.01)


def encode_fixed(x) -> Fixed:
    """Encode a real (float or Fraction) as Fixed; floor to the grid."""
    if isinstance(x, Fixed):
        return x
    if abs(x) >= (1 << 15):
        raise RangeExceeded(f"|{x}| too large to encode")
    if isinstance(x, Fraction):
        return Fixed(math.floor(x * SCALE))
    return Fixed(math.floor(float(x) * SCALE))


def decode_fixed(f: Fixed) -> float:
    return f.raw / SCALE


def asr(value: int, bits: int) -> int:
    """Arithmetic shift right: floor division by 2^bits, exact on ints."""
    return value >> bits


def fixed_add(a: Fixed, b: Fixed) -> Fixed:
    return Fixed(a.raw + b.raw)


def fixed_sub(a: Fixed, b: Fixed) -> Fixed:
    return Fixed(a.raw - b.raw)


def fixed_mul(a: Fixed, b: Fixed) -> Fixed:
    return Fixed(asr(a.raw * b.raw, SCALE_BITS))


def to_field(f: Fixed) -> int:
    """Offset field encoding used for hashing and circuit variables."""
    return f.raw + OFFSET


def from_field(value: int) -> Fixed:
    value = value % FIELD_PRIME
    if not 0 <= value < 2 * OFFSET:
        raise FixedOverflow(f"field value {value} is not an offset encoding")
    return Fixed(value - OFFSET)


@dataclass(frozen=True)
class ModelParams:
    """Weights 6x9 and biases 6, shared shape for local and global models."""

    weights: tuple  # 6 rows of 9 Fixed
    biases: tuple  # 6 Fixed
    version: int = 0

    def __post_init__(self):
        if len(self.weights) != NUM_CLASSES or any(len(r) != NUM_FEATURES for r in self.weights):
            raise ValueError("weights must be 6x9")
        if len(self.biases) != NUM_CLASSES:
            raise ValueError("biases must have 6 entries")

    @classmethod
    def zero(cls, version: int = 0) -> "ModelParams":
        return cls(
            tuple(tuple(ZERO for _ in range(NUM_FEATURES)) for _ in range(NUM_CLASSES)),
            tuple(ZERO for _ in range(NUM_CLASSES)),
            version,
        )

    @classmethod
    def from_raws(cls, w_raws, b_raws, version: int = 0) -> "ModelParams":
        return cls(
            tuple(tuple(Fixed(r) for r in row) for row in w_raws),
            tuple(Fixed(r) for r in b_raws),
            version,
        )

    def flat_raws(self) -> list:
        """54 weights row-major, then 6 biases (raw units)."""
        out = [w.raw for row in self.weights for w in row]
        out.extend(b.raw for b in self.biases)
        return out

    def to_flat(self) -> list:
        """Checkpoint layout: 54 weights row-major, 6 biases, then version."""
        return self.flat_raws() + [self.version]

    @classmethod
    def from_flat(cls, flat) -> "ModelParams":
        if len(flat) != NUM_CLASSES * NUM_FEATURES + NUM_CLASSES + 1:
            raise ValueError("flat model must have 61 entries")
        w = [flat[i * NUM_FEATURES:(i + 1) * NUM_FEATURES] for i in range(NUM_CLASSES)]
        b = flat[NUM_CLASSES * NUM_FEATURES:NUM_CLASSES * NUM_FEATURES + NUM_CLASSES]
        return cls.from_raws(w, b, int(flat[-1]))

    def to_field_list(self) -> list:
        """60 offset-encoded field elements (version excluded: ledger metadata)."""
        return [to_field(w) for row in self.weights for w in row] + [to_field(b) for b in self.biases]


@dataclass(frozen=True)
class LearningBatch:
    """Device-attested batch: records, signed counter, and commitment."""

    records: tuple
    counter: int
    commitment: object  # MerkleCommitment
    signature: object  # Signature


def forward(model: ModelParams, features) -> list:
    """Affine scores W*x + b; each product is a truncating fixed_mul, the
    nine-term sum accumulates exactly and is bound-checked once per score."""
    if len(features) != NUM_FEATURES:
        raise ValueError(f"expected {NUM_FEATURES} features")
    scores = []
    for i in range(NUM_CLASSES):
        row = model.weights[i]
        acc = model.biases[i].raw
        for j in range(NUM_FEATURES):
            acc += asr(row[j].raw * features[j].raw, SCALE_BITS)
        scores.append(Fixed(acc))
    return scores


def predict(scores) -> int:
    """Index of the maximum score; ties break to the lowest index."""
    best, best_i = scores[0].raw, 0
    for i in range(1, len(scores)):
        if scores[i].raw > best:
            best, best_i = scores[i].raw, i
    return best_i


def mse_loss(scores, label: int) -> Fixed:
    """Mean over the six classes of (score - onehot)^2 in fixed point."""
    if not 0 <= label < NUM_CLASSES:
        raise ValueError("invalid label")
    acc = 0
    for i in range(NUM_CLASSES):
        err = scores[i].raw - (SCALE if i == label else 0)
        acc += asr(err * err, SCALE_BITS)
    sixth = SCALE // NUM_CLASSES
    return Fixed(asr(sixth * acc, SCALE_BITS))


def grad_scale_raw(batch_size: int) -> int:
    """encode_fixed(2 / (6 * n)): the mean-MSE gradient scaling constant."""
    return (2 * SCALE) // (NUM_CLASSES * batch_size)


def local_learn(gm: ModelParams, batch: LearningBatch, lr: Fixed = DEFAULT_LEARNING_RATE) -> ModelParams:
    """One full-batch gradient step on mean MSE, entirely in fixed point.

    Gradient: dW = (2/(6n)) * sum_r err_r * x_r^T and db = (2/(6n)) * sum_r
    err_r with err = scores - onehot(label). Per-record error/feature
    products truncate like fixed_mul; the cross-record sums accumulate
    exactly; the 2/(6n) scaling and the lr step each truncate once.
    """
    records = batch.records
    n = len(records)
    if n == 0:
        raise EmptyBatch("cannot learn from an empty batch")
    gsum_w = [[0] * NUM_FEATURES for _ in range(NUM_CLASSES)]
    gsum_b = [0] * NUM_CLASSES
    for rec in records:
        scores = forward(gm, rec.features)
        for i in range(NUM_CLASSES):
            err = scores[i].raw - (SCALE if i == rec.label else 0)
            gsum_b[i] += err
            row = gsum_w[i]
            for j in range(NUM_FEATURES):
                q = asr(err * rec.features[j].raw, SCALE_BITS)
                if not -RAW_BOUND < q < RAW_BOUND:
                    raise FixedOverflow("gradient product out of range")
                row[j] += q
    c = grad_scale_raw(n)
    lr_raw = lr.raw
    new_w = []
    for i in range(NUM_CLASSES):
        row = []
        for j in range(NUM_FEATURES):
            delta = Fixed(asr(c * gsum_w[i][j], SCALE_BITS))
            step = Fixed(asr(lr_raw * delta.raw, SCALE_BITS))
            row.append(Fixed(gm.weights[i][j].raw - step.raw))
        new_w.append(tuple(row))
    new_b = []
    for i in range(NUM_CLASSES):
        delta = Fixed(asr(c * gsum_b[i], SCALE_BITS))
        step = Fixed(asr(lr_raw * delta.raw, SCALE_BITS))
        new_b.append(Fixed(gm.biases[i].raw - step.raw))
    return ModelParams(tuple(new_w), tuple(new_b), gm.version + 1)

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vflsim.commitments import DataRecord
from vflsim.errors import EmptyBatch, FixedOverflow, RangeExceeded
from vflsim.fixedpoint import (
    Fixed,
    LearningBatch,
    ModelParams,
    OFFSET,
    RAW_BOUND,
    SCALE,
    decode_fixed,
    encode_fixed,
    fixed_mul,
    forward,
    from_field,
    grad_scale_raw,
    local_learn,
    mse_loss,
    predict,
    to_field,
)

# Frozen goldens for the random.Random(77) fixture (model, record, batch of 10).
GOLDEN_SCORES = [-219863, 145103, -363493, -145374, 211932, 46417]
GOLDEN_PREDICT = 4
GOLDEN_MSE_LABEL3 = 745281
GOLDEN_LM_ROW0 = [-63799, -25586, -92866, -70251, -95146, -136066, -43167, 53312, 96088]
GOLDEN_LM_BIASES = [55795, -44761, -36673, 6399, 50498, -33213]


def fixture_model_and_records():
    rng = random.Random(77)
    w = [[rng.randrange(-3 * SCALE, 3 * SCALE) for _ in range(9)] for _ in range(6)]
    b = [rng.randrange(-SCALE, SCALE) for _ in range(6)]
    model = ModelParams.from_raws(w, b)
    feats = tuple(Fixed(rng.randrange(0, SCALE)) for _ in range(9))
    records = tuple(
        DataRecord(tuple(Fixed(rng.randrange(0, SCALE)) for _ in range(9)),
                   rng.randrange(6))
        for _ in range(10)
    )
    return model, feats, records


# --- rational-arithmetic oracle (same truncation points, Fraction domain) ----

def oracle_trunc(value: Fraction) -> int:
    return math.floor(value)


def oracle_forward(model, feats):
    scores = []
    for i in range(6):
        acc = model.biases[i].raw
        for j in range(9):
            acc += oracle_trunc(Fraction(model.weights[i][j].raw * feats[j].raw, SCALE))
        scores.append(acc)
    return scores


def oracle_local_learn(model, records, lr_raw):
    n = len(records)
    gsum_w = [[0] * 9 for _ in range(6)]
    gsum_b = [0] * 6
    for rec in records:
        scores = oracle_forward(model, rec.features)
        for i in range(6):
            err = scores[i] - (SCALE if i == rec.label else 0)
            gsum_b[i] += err
            for j in range(9):
                gsum_w[i][j] += oracle_trunc(Fraction(err * rec.features[j].raw, SCALE))
    c = grad_scale_raw(n)
    w_out, b_out = [], []
    for i in range(6):
        row = []
        for j in range(9):
            delta = oracle_trunc(Fraction(c * gsum_w[i][j], SCALE))
            step = oracle_trunc(Fraction(lr_raw * delta, SCALE))
            row.append(model.weights[i][j].raw - step)
        w_out.append(row)
        delta = oracle_trunc(Fraction(c * gsum_b[i], SCALE))
        step = oracle_trunc(Fraction(lr_raw * delta, SCALE))
        b_out.append(model.biases[i].raw - step)
    return w_out, b_out


# --- pure rational loss/gradient for the finite-difference check --------------

def rational_loss(w, b, records):
    total = Fraction(0)
    for feats, label in records:
        for i in range(6):
            score = b[i] + sum(w[i][j] * feats[j] for j in range(9))
            err = score - (1 if i == label else 0)
            total += Fraction(err * err, 6)
    return total / len(records)


def rational_gradient(w, b, records):
    n = len(records)
    gw = [[Fraction(0)] * 9 for _ in range(6)]
    gb = [Fraction(0)] * 6
    for feats, label in records:
        for i in range(6):
            score = b[i] + sum(w[i][j] * feats[j] for j in range(9))
            err = score - (1 if i == label else 0)
            gb[i] += Fraction(2, 6 * n) * err
            for j in range(9):
                gw[i][j] += Fraction(2, 6 * n) * err * feats[j]
    return gw, gb


# --- encode/decode -------------------------------------------------------------

def test_encode_trivials():
    assert encode_fixed(0).raw == 0
    assert encode_fixed(1.0).raw == 65536
    assert encode_fixed(-2.5).raw == -163840


def test_encode_range_guard():
    with pytest.raises(RangeExceeded):
        encode_fixed(1 << 15)
    with pytest.raises(RangeExceeded):
        encode_fixed(-(1 << 15))


def test_decode_roundtrip_bound():
    rng = random.Random(3)
    for _ in range(2_000):
        x = rng.uniform(-30000, 30000)
        f = encode_fixed(x)
        assert x - 2**-16 <= decode_fixed(f) <= x


@given(st.integers(min_value=-RAW_BOUND + 1, max_value=RAW_BOUND - 1))
def test_field_embedding_roundtrip(raw):
    f = Fixed(raw)
    assert from_field(to_field(f)) == f
    assert 0 <= to_field(f) < 2 * OFFSET


def test_raw_bound_enforced():
    with pytest.raises(FixedOverflow):
        Fixed(RAW_BOUND)
    with pytest.raises(FixedOverflow):
        Fixed(-RAW_BOUND)


# --- fixed_mul ------------------------------------------------------------------

def test_mul_identity():
    x = Fixed(123456)
    assert fixed_mul(encode_fixed(1.0), x) == x


def test_mul_exact_case():
    assert fixed_mul(encode_fixed(0.5), encode_fixed(0.5)) == encode_fixed(0.25)


def test_mul_negative_golden():
    assert fixed_mul(encode_fixed(-1.5), encode_fixed(2.0)).raw == -196608


def test_mul_matches_rational_oracle():
    rng = random.Random(17)
    for _ in range(3_000):
        a = Fixed(rng.randrange(-SCALE * 100, SCALE * 100))
        b = Fixed(rng.randrange(-SCALE * 100, SCALE * 100))
        expected = oracle_trunc(Fraction(a.raw * b.raw, SCALE))
        assert fixed_mul(a, b).raw == expected


def test_mul_floor_toward_minus_infinity():
    assert fixed_mul(Fixed(-1), Fixed(1)).raw == -1  # -1/2^16 floors to -1 raw
    assert fixed_mul(Fixed(1), Fixed(1)).raw == 0


def test_mul_overflow():
    big = Fixed(RAW_BOUND - 1)
    with pytest.raises(FixedOverflow):
        fixed_mul(big, big)


# --- forward / predict / loss ----------------------------------------------------

def test_forward_zero_model():
    model = ModelParams.zero()
    feats = tuple(Fixed(1000 * i) for i in range(9))
    assert [s.raw for s in forward(model, feats)] == [0] * 6


def test_forward_identity_row():
    w = [[0] * 9 for _ in range(6)]
    w[2][4] = SCALE  # encode(1) at row 2, column 4
    model = ModelParams.from_raws(w, [0] * 6)
    feats = tuple(Fixed(100 + i) for i in range(9))
    scores = forward(model, feats)
    assert scores[2].raw == feats[4].raw
    assert all(scores[i].raw == 0 for i in range(6) if i != 2)


def test_forward_golden():
    model, feats, _ = fixture_model_and_records()
    scores = forward(model, feats)
    assert [s.raw for s in scores] == GOLDEN_SCORES
    assert oracle_forward(model, feats) == GOLDEN_SCORES


def test_predict_trivials_and_golden():
    assert predict([Fixed(1), Fixed(0), Fixed(0), Fixed(0), Fixed(0), Fixed(0)]) == 0
    assert predict([Fixed(5)] * 6) == 0  # tie -> lowest index
    assert predict([Fixed(r) for r in GOLDEN_SCORES]) == GOLDEN_PREDICT


def test_predict_shift_invariance():
    rng = random.Random(23)
    for _ in range(200):
        scores = [rng.randrange(-10 * SCALE, 10 * SCALE) for _ in range(6)]
        shift = rng.randrange(-5 * SCALE, 5 * SCALE)
        a = predict([Fixed(s) for s in scores])
        b = predict([Fixed(s + shift) for s in scores])
        assert a == b


def test_mse_trivials():
    onehot = [Fixed(SCALE if i == 2 else 0) for i in range(6)]
    assert mse_loss(onehot, 2).raw == 0
    zero = [Fixed(0)] * 6
    sixth = encode_fixed(Fraction(1, 6)).raw
    assert abs(mse_loss(zero, 4).raw - sixth) <= 1


def test_mse_golden():
    scores = [Fixed(r) for r in GOLDEN_SCORES]
    assert mse_loss(scores, 3).raw == GOLDEN_MSE_LABEL3
    # rational oracle with the same truncation points
    acc = sum(oracle_trunc(Fraction((r - (SCALE if i == 3 else 0)) ** 2, SCALE))
              for i, r in enumerate(GOLDEN_SCORES))
    assert oracle_trunc(Fraction((SCALE // 6) * acc, SCALE)) == GOLDEN_MSE_LABEL3


# --- local_learn -----------------------------------------------------------------

def _batch(records):
    return LearningBatch(tuple(records), 1, None, None)


def test_zero_gradient_leaves_model_unchanged():
    # records already predicted with exact onehot scores
    w = [[0] * 9 for _ in range(6)]
    model = ModelParams.from_raws(w, [SCALE if i == 1 else 0 for i in range(6)])
    feats = tuple(Fixed(0) for _ in range(9))
    records = [DataRecord(feats, 1) for _ in range(4)]
    out = local_learn(model, _batch(records), encode_fixed(1.0))
    assert out.weights == model.weights
    assert out.biases == model.biases
    assert out.version == model.version + 1


def test_single_record_zero_model_hand_oracle():
    # W row for the true class gains the (2/6)-scaled feature vector
    feats = tuple(Fixed(1000 * (j + 1)) for j in range(9))
    records = [DataRecord(feats, 2)]
    out = local_learn(ModelParams.zero(), _batch(records), encode_fixed(1.0))
    c = grad_scale_raw(1)  # encode(2/6)
    for j in range(9):
        e_x = (-SCALE * feats[j].raw) >> 16
        expected = -((c * e_x) >> 16)  # lr = 1.0 makes the step the delta itself
        assert out.weights[2][j].raw == expected
        assert expected > 0
    for i in (0, 1, 3, 4, 5):
        assert all(v.raw == 0 for v in out.weights[i])
    assert out.biases[2].raw == -((c * -SCALE) >> 16)


def test_local_learn_golden_batch_10():
    model, _, records = fixture_model_and_records()
    out = local_learn(model, _batch(records), encode_fixed(0.01))
    assert [v.raw for v in out.weights[0]] == GOLDEN_LM_ROW0
    assert [v.raw for v in out.biases] == GOLDEN_LM_BIASES
    w_oracle, b_oracle = oracle_local_learn(model, records, encode_fixed(0.01).raw)
    assert [[v.raw for v in row] for row in out.weights] == w_oracle
    assert [v.raw for v in out.biases] == b_oracle


def test_local_learn_matches_oracle_random():
    rng = random.Random(41)
    for _ in range(5):
        w = [[rng.randrange(-2 * SCALE, 2 * SCALE) for _ in range(9)] for _ in range(6)]
        b = [rng.randrange(-SCALE, SCALE) for _ in range(6)]
        model = ModelParams.from_raws(w, b)
        records = tuple(
            DataRecord(tuple(Fixed(rng.randrange(0, SCALE)) for _ in range(9)),
                       rng.randrange(6))
            for _ in range(rng.choice((1, 2, 5, 8)))
        )
        out = local_learn(model, _batch(records), encode_fixed(0.05))
        w_oracle, b_oracle = oracle_local_learn(model, records, encode_fixed(0.05).raw)
        assert [[v.raw for v in row] for row in out.weights] == w_oracle
        assert [v.raw for v in out.biases] == b_oracle


def test_empty_batch_rejected():
    with pytest.raises(EmptyBatch):
        local_learn(ModelParams.zero(), _batch([]), encode_fixed(0.01))


def test_gradient_matches_finite_differences():
    # central differences of the rational loss, 20 random instances, 1e-6 rel
    rng = random.Random(90)
    eps = Fraction(1, 10_000)
    for _ in range(20):
        w = [[Fraction(rng.randrange(-2 * SCALE, 2 * SCALE), SCALE) for _ in range(9)]
             for _ in range(6)]
        b = [Fraction(rng.randrange(-SCALE, SCALE), SCALE) for _ in range(6)]
        records = [(
            [Fraction(rng.randrange(0, SCALE), SCALE) for _ in range(9)],
            rng.randrange(6),
        )]
        gw, gb = rational_gradient(w, b, records)
        i, j = rng.randrange(6), rng.randrange(9)
        w_hi = [row[:] for row in w]
        w_lo = [row[:] for row in w]
        w_hi[i][j] += eps
        w_lo[i][j] -= eps
        fd = (rational_loss(w_hi, b, records) - rational_loss(w_lo, b, records)) / (2 * eps)
        if fd == 0:
            assert gw[i][j] == 0
        else:
            assert abs(gw[i][j] - fd) / abs(fd) < Fraction(1, 1_000_000)
        b_hi, b_lo = b[:], b[:]
        b_hi[i] += eps
        b_lo[i] -= eps
        fd_b = (rational_loss(w, b_hi, records) - rational_loss(w, b_lo, records)) / (2 * eps)
        if fd_b == 0:
            assert gb[i] == 0
        else:
            assert abs(gb[i] - fd_b) / abs(fd_b) < Fraction(1, 1_000_000)


def test_model_flat_serialization_roundtrip():
    model, _, _ = fixture_model_and_records()
    flat = model.to_flat()
    assert len(flat) == 61
    assert ModelParams.from_flat(flat) == model
    assert len(model.to_field_list()) == 60

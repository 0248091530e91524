"""Constraint gadgets mirroring the native primitives.

Every gadget reproduces its native counterpart value-for-value: Poseidon
lanes are reallocated as fresh variables after each round so linear
combinations stay small, scalar multiplications run bitwise (with constant
point tables for the fixed base), and every fixed-point truncation carries a
32-bit offset decomposition of the quotient plus a 16-bit remainder
decomposition, which is where the overflow guard lives in-circuit.
"""

from __future__ import annotations

from .curve import BASE_POINT, EDWARDS_A, EDWARDS_D, scalar_mul
from .fields import FIELD_PRIME
from .fixedpoint import (
    NUM_CLASSES,
    NUM_FEATURES,
    OFFSET,
    SCALE,
    SCALE_BITS,
)
from .poseidon import DEFAULT_PARAMS, PoseidonParams
from .r1cs import LC, CircuitBuilder, lc_const, lc_var

# Scalar bit widths: S is below the 251-bit subgroup order, the Poseidon
# challenge is a full field element.
S_BITS = 251
H_BITS = 254


# --- Poseidon ---------------------------------------------------------------

def poseidon_permute_lcs(b: CircuitBuilder, lanes, params: PoseidonParams = DEFAULT_PARAMS):
    """Width-3 permutation over linear combinations; returns fresh lane vars."""
    t = params.t
    rc = params.round_constants
    mds = params.mds
    half = params.full_rounds // 2
    partial_end = half + params.partial_rounds
    lanes = list(lanes)
    for r in range(params.full_rounds + params.partial_rounds):
        base = r * t
        lanes = [lanes[i] + rc[base + i] for i in range(t)]
        sbox_lanes = range(t) if not half <= r < partial_end else (0,)
        for i in sbox_lanes:
            x = lanes[i]
            x2 = b.mul(x, x)
            x4 = b.mul(x2, x2)
            lanes[i] = b.mul(x4, x)
        mixed = []
        for i in range(t):
            acc = LC()
            for j in range(t):
                acc = acc + lanes[j].scale(mds[i][j])
            mixed.append(b.alloc_lc(acc))
        lanes = mixed
    return lanes


def poseidon_compress_lcs(b: CircuitBuilder, left: LC, right: LC,
                          params: PoseidonParams = DEFAULT_PARAMS) -> LC:
    return poseidon_permute_lcs(b, [lc_const(0), left, right], params)[0]


def poseidon_hash_lcs(b: CircuitBuilder, inputs,
                      params: PoseidonParams = DEFAULT_PARAMS) -> LC:
    """Chained hash over LCs, same fold as the native poseidon_hash."""
    if not inputs:
        raise ValueError("empty input")
    if len(inputs) == 1:
        return poseidon_compress_lcs(b, inputs[0], lc_const(0), params)
    acc = poseidon_compress_lcs(b, inputs[0], inputs[1], params)
    for value in inputs[2:]:
        acc = poseidon_compress_lcs(b, acc, value, params)
    return acc


# --- babyjubjub -------------------------------------------------------------

def on_curve_gadget(b: CircuitBuilder, x: LC, y: LC):
    x2 = b.mul(x, x)
    y2 = b.mul(y, y)
    x2y2 = b.mul(x2, y2)
    b.enforce_zero(x2.scale(EDWARDS_A) + y2 - x2y2.scale(EDWARDS_D) - 1)


def point_add_gadget(b: CircuitBuilder, p, q):
    """Unified twisted-Edwards addition; returns (x3, y3) as fresh variables."""
    x1, y1 = p
    x2, y2 = q
    x1x2 = b.mul(x1, x2)
    y1y2 = b.mul(y1, y2)
    x1y2 = b.mul(x1, y2)
    y1x2 = b.mul(y1, x2)
    dxy = b.mul(x1x2.scale(EDWARDS_D), y1y2)
    x3 = b.div(x1y2 + y1x2, dxy + 1)
    y3 = b.div(y1y2 - x1x2.scale(EDWARDS_A), lc_const(1) - dxy)
    return x3, y3


def point_select_gadget(b: CircuitBuilder, bit: LC, p_true, p_false):
    """(bit ? p_true : p_false) with the result rematerialized as variables."""
    dx = b.mul(bit, p_true[0] - p_false[0])
    dy = b.mul(bit, p_true[1] - p_false[1])
    return b.alloc_lc(p_false[0] + dx), b.alloc_lc(p_false[1] + dy)


def scalar_mul_base_gadget(b: CircuitBuilder, bits, base=BASE_POINT):
    """Multiply the constant base point by a bit-decomposed scalar.

    Addends are the precomputed native doublings of the base, selected
    linearly per bit, so each bit costs one full addition.
    """
    acc = (lc_const(0), lc_const(1))
    cur = base
    for bit in bits:
        bx, by = cur.x.value, cur.y.value
        addend = (bit.scale(bx), bit.scale((by - 1) % FIELD_PRIME) + 1)
        acc = point_add_gadget(b, acc, addend)
        cur = scalar_mul(2, cur)
    return acc


def scalar_mul_var_gadget(b: CircuitBuilder, bits, point):
    """Double-and-add over a variable base point, LSB-first."""
    acc = (lc_const(0), lc_const(1))
    cur = point
    last = len(bits) - 1
    for i, bit in enumerate(bits):
        total = point_add_gadget(b, acc, cur)
        acc = point_select_gadget(b, bit, total, acc)
        if i != last:
            cur = point_add_gadget(b, cur, cur)
    return acc


def point_octuple_gadget(b: CircuitBuilder, p):
    for _ in range(3):
        p = point_add_gadget(b, p, p)
    return p


def eddsa_verify_gadget(b: CircuitBuilder, pk, msg: LC, sig_r, sig_s: LC,
                        params: PoseidonParams = DEFAULT_PARAMS):
    """Enforce the cofactor-8 verification equation 8*S*B = 8*R + 8*h*A."""
    on_curve_gadget(b, pk[0], pk[1])
    on_curve_gadget(b, sig_r[0], sig_r[1])
    h = poseidon_hash_lcs(b, [sig_r[0], sig_r[1], pk[0], pk[1], msg], params)
    h_bits = b.alloc_bits(h, H_BITS)
    s_bits = b.alloc_bits(sig_s, S_BITS)
    sb = scalar_mul_base_gadget(b, s_bits)
    ha = scalar_mul_var_gadget(b, h_bits, pk)
    lhs = point_octuple_gadget(b, sb)
    rhs = point_add_gadget(b, point_octuple_gadget(b, sig_r),
                           point_octuple_gadget(b, ha))
    b.enforce_eq(lhs[0], rhs[0])
    b.enforce_eq(lhs[1], rhs[1])


# --- Merkle -----------------------------------------------------------------

def merkle_root_gadget(b: CircuitBuilder, leaves,
                       params: PoseidonParams = DEFAULT_PARAMS) -> LC:
    """Recompute the zero-padded binary Poseidon tree over leaf LCs."""
    if not leaves:
        raise ValueError("empty leaf list")
    depth = max(1, (len(leaves) - 1).bit_length())
    level = list(leaves) + [lc_const(0)] * ((1 << depth) - len(leaves))
    while len(level) > 1:
        level = [
            poseidon_compress_lcs(b, level[i], level[i + 1], params)
            for i in range(0, len(level), 2)
        ]
    return level[0]


# --- fixed point ------------------------------------------------------------

def range_check_offset(b: CircuitBuilder, raw_lc: LC):
    """Constrain a raw-value LC to the guarded range via its offset bits."""
    b.alloc_bits(raw_lc + OFFSET, 32)


def fixed_mul_gadget(b: CircuitBuilder, x_raw: LC, y_raw: LC) -> LC:
    """Truncating product: q = asr(x*y, 16) with q range-checked."""
    q = b.aux()
    b.hint_trunc_quotient(q, x_raw, y_raw, SCALE_BITS)
    q_lc = lc_var(q)
    b.alloc_bits(q_lc + OFFSET, 32)
    rem_start = b.aux(SCALE_BITS)
    b.hint_rem_bits(rem_start, SCALE_BITS, x_raw, y_raw)
    rem = LC(tuple((rem_start + i, 1 << i) for i in range(SCALE_BITS)))
    for i in range(SCALE_BITS):
        b.boolean(rem_start + i)
    b.enforce(x_raw, y_raw, q_lc.scale(SCALE) + rem)
    return q_lc


def label_onehot_gadget(b: CircuitBuilder, label: LC):
    """Indicator LCs for the six classes from the label's 3-bit decomposition."""
    bits = b.alloc_bits(label, 3)
    l0, l1, l2 = bits
    b.enforce(l1, l2, LC())  # forbids labels 6 and 7
    p01 = b.mul(l0, l1)
    p02 = b.mul(l0, l2)
    return [
        lc_const(1) - l0 - l1 - l2 + p01 + p02,
        l0 - p01 - p02,
        l1 - p01,
        p01,
        l2 - p02,
        p02,
    ]


def local_learn_gadget(b: CircuitBuilder, gm_w_raw, gm_b_raw, records, lr_raw: int):
    """One gradient step over the batch, truncation-for-truncation equal to
    the native local_learn.

    ``records`` is a list of (feature_raw_lcs, label_lc) pairs; returns the
    updated (weights, biases) raw LCs, each materialized and range-checked.
    """
    n = len(records)
    c_raw = (2 * SCALE) // (NUM_CLASSES * n)
    gsum_w = [[LC() for _ in range(NUM_FEATURES)] for _ in range(NUM_CLASSES)]
    gsum_b = [LC() for _ in range(NUM_CLASSES)]
    for features, label in records:
        onehot = label_onehot_gadget(b, label)
        for i in range(NUM_CLASSES):
            score = gm_b_raw[i]
            for j in range(NUM_FEATURES):
                score = score + fixed_mul_gadget(b, gm_w_raw[i][j], features[j])
            score_var = b.alloc_lc(score)
            range_check_offset(b, score_var)
            err = score_var - onehot[i].scale(SCALE)
            gsum_b[i] = gsum_b[i] + err
            for j in range(NUM_FEATURES):
                gsum_w[i][j] = gsum_w[i][j] + fixed_mul_gadget(b, err, features[j])
    new_w = []
    new_b = []
    for i in range(NUM_CLASSES):
        row = []
        for j in range(NUM_FEATURES):
            delta = fixed_mul_gadget(b, lc_const(c_raw), gsum_w[i][j])
            step = fixed_mul_gadget(b, lc_const(lr_raw), delta)
            out = b.alloc_lc(gm_w_raw[i][j] - step)
            range_check_offset(b, out)
            row.append(out)
        new_w.append(row)
        delta = fixed_mul_gadget(b, lc_const(c_raw), gsum_b[i])
        step = fixed_mul_gadget(b, lc_const(lr_raw), delta)
        out = b.alloc_lc(gm_b_raw[i] - step)
        range_check_offset(b, out)
        new_b.append(out)
    return new_w, new_b

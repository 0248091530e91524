"""The two provable programs: device registration and local learning.

Registration enforces that a CA signature over the device public key
verifies under the (public) root key and outputs the salted device handle.
Learning re-derives the batch commitment from the raw records, verifies the
device's signature over (root, counter), ties the device key to the public
handle, and replays the gradient step so the published local model is forced
to equal the honest update.

Input layouts are fixed here and mirrored by the encoder helpers; actors and
the ledger never build assignments by hand.
"""

from __future__ import annotations

from .curve import CurvePoint
from .eddsa import Signature
from .fixedpoint import (
    DEFAULT_LEARNING_RATE,
    Fixed,
    ModelParams,
    NUM_CLASSES,
    NUM_FEATURES,
    OFFSET,
    to_field,
)
from .gadgets import (
    eddsa_verify_gadget,
    local_learn_gadget,
    merkle_root_gadget,
    on_curve_gadget,
    poseidon_hash_lcs,
)
from .poseidon import DEFAULT_PARAMS, PoseidonParams
from .r1cs import CircuitBuilder, ConstraintSystem, check_satisfaction, synthesize_witness  # noqa: F401  (re-exported)

REGISTRATION_LABEL = "registration"

MODEL_WIDTH = NUM_CLASSES * NUM_FEATURES + NUM_CLASSES  # 60 field elements


def learning_label(batch_size: int) -> str:
    return f"learning-{batch_size}"


def build_registration_circuit(params: PoseidonParams = DEFAULT_PARAMS) -> ConstraintSystem:
    """Public input RK_pub, public output DH, private (DK_pub, DC, salt)."""
    b = CircuitBuilder(REGISTRATION_LABEL)
    rk_x, rk_y = b.public_inputs(2)
    (dh_out,) = b.public_outputs(1)
    dk_x, dk_y, dc_rx, dc_ry, dc_s, salt = b.private_inputs(6)
    on_curve_gadget(b, dk_x, dk_y)
    key_digest = poseidon_hash_lcs(b, [dk_x, dk_y], params)
    eddsa_verify_gadget(b, (rk_x, rk_y), key_digest, (dc_rx, dc_ry), dc_s, params)
    handle = poseidon_hash_lcs(b, [dk_x, dk_y, salt], params)
    b.bind_output(dh_out, handle)
    return b.finish()


def build_learning_circuit(batch_size: int, lr: Fixed = DEFAULT_LEARNING_RATE,
                           params: PoseidonParams = DEFAULT_PARAMS) -> ConstraintSystem:
    """Public inputs (DH, GM), public outputs (counter, LM).

    Private inputs are the batch records, the device signature and counter,
    the device public key, and the handle salt. The learning rate is a
    build-time constant of the circuit.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    b = CircuitBuilder(learning_label(batch_size))
    pub = b.public_inputs(1 + MODEL_WIDTH)
    dh_in = pub[0]
    gm_vars = pub[1:]
    outs = b.public_outputs(1 + MODEL_WIDTH)
    priv = b.private_inputs(10 * batch_size + 7)

    records = []
    leaves = []
    for r in range(batch_size):
        base = 10 * r
        features = priv[base:base + NUM_FEATURES]
        label = priv[base + NUM_FEATURES]
        records.append((features, label))
        for f in features:
            b.alloc_bits(f, 32)
        leaves.append(poseidon_hash_lcs(b, features + [label], params))
    counter, sig_rx, sig_ry, sig_s, dk_x, dk_y, salt = priv[10 * batch_size:]

    root = merkle_root_gadget(b, leaves, params)
    message = poseidon_hash_lcs(b, [root, counter], params)
    eddsa_verify_gadget(b, (dk_x, dk_y), message, (sig_rx, sig_ry), sig_s, params)
    handle = poseidon_hash_lcs(b, [dk_x, dk_y, salt], params)
    b.enforce_eq(handle, dh_in)

    gm_w_raw = []
    for i in range(NUM_CLASSES):
        row = []
        for j in range(NUM_FEATURES):
            v = gm_vars[i * NUM_FEATURES + j]
            b.alloc_bits(v, 32)
            row.append(v - OFFSET)
        gm_w_raw.append(row)
    gm_b_raw = []
    for i in range(NUM_CLASSES):
        v = gm_vars[NUM_CLASSES * NUM_FEATURES + i]
        b.alloc_bits(v, 32)
        gm_b_raw.append(v - OFFSET)

    feature_raws = [
        ([f - OFFSET for f in features], label) for features, label in records
    ]
    new_w, new_b = local_learn_gadget(b, gm_w_raw, gm_b_raw, feature_raws, lr.raw)

    b.bind_output(outs[0], counter)
    k = 1
    for i in range(NUM_CLASSES):
        for j in range(NUM_FEATURES):
            b.bind_output(outs[k], new_w[i][j] + OFFSET)
            k += 1
    for i in range(NUM_CLASSES):
        b.bind_output(outs[k], new_b[i] + OFFSET)
        k += 1
    return b.finish()


# --- assignment encoders ------------------------------------------------------

def registration_public_inputs(rk_pub: CurvePoint) -> list:
    return [rk_pub.x.value, rk_pub.y.value]


def registration_private_inputs(dk_pub: CurvePoint, certificate: Signature, salt: int) -> list:
    return [
        dk_pub.x.value,
        dk_pub.y.value,
        certificate.r.x.value,
        certificate.r.y.value,
        certificate.s,
        int(salt),
    ]


def learning_public_inputs(dh, gm: ModelParams) -> list:
    return [int(dh)] + gm.to_field_list()


def learning_private_inputs(batch, dk_pub: CurvePoint, salt: int) -> list:
    values = []
    for rec in batch.records:
        values.extend(to_field(f) for f in rec.features)
        values.append(rec.label)
    sig = batch.signature
    values.extend([
        int(batch.counter),
        sig.r.x.value,
        sig.r.y.value,
        sig.s,
        dk_pub.x.value,
        dk_pub.y.value,
        int(salt),
    ])
    return values


def learning_expected_outputs(counter: int, lm: ModelParams) -> list:
    return [int(counter)] + lm.to_field_list()

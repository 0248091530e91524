"""Poseidon permutation over the BN254 scalar field.

The instantiation is width t=3 (2-to-1 compression), S-box x^5, 8 full and 57
partial rounds. Round constants and the Cauchy MDS matrix are generated with
the standard Grain-LFSR procedure, which makes the hash bit-compatible with
the widely used circomlib vectors (``hash([1, 2])`` and ``hash([3, 4])`` are
pinned in the test suite).

Inputs longer than two elements are absorbed by left-fold chaining of the
2-to-1 compression: ``H(x1..xn) = P(...P(P(x1, x2), x3)..., xn)``. A single
input hashes as ``P(x, 0)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyInput
from .fields import FIELD_PRIME, FieldElement, to_int

P = FIELD_PRIME


@dataclass(frozen=True)
class PoseidonParams:
    """Fixed permutation parameters, identical for native and in-circuit use."""

    t: int
    full_rounds: int
    partial_rounds: int
    alpha: int
    round_constants: tuple  # (full_rounds + partial_rounds) * t ints
    mds: tuple  # t rows of t ints

    def __post_init__(self):
        rounds = self.full_rounds + self.partial_rounds
        if len(self.round_constants) != rounds * self.t:
            raise ValueError("round constant count does not match round count")
        if len(self.mds) != self.t or any(len(row) != self.t for row in self.mds):
            raise ValueError("MDS matrix shape mismatch")


def _grain_bit_stream(field: int, sbox: int, n: int, t: int, r_f: int, r_p: int):
    """Self-shrinking Grain LFSR seeded from the instance parameters."""
    bits = []
    for value, width in ((field, 2), (sbox, 4), (n, 12), (t, 12), (r_f, 10), (r_p, 10)):
        bits.extend(int(b) for b in bin(value)[2:].zfill(width))
    bits.extend([1] * 30)
    state = bits

    def step():
        nb = state[62] ^ state[51] ^ state[38] ^ state[23] ^ state[13] ^ state[0]
        state.pop(0)
        state.append(nb)
        return nb

    for _ in range(160):
        step()
    while True:
        if step() == 1:
            yield step()
        else:
            step()


def _draw(stream, num_bits: int) -> int:
    v = 0
    for _ in range(num_bits):
        v = (v << 1) | next(stream)
    return v


def generate_params(t: int = 3, full_rounds: int = 8, partial_rounds: int = 57,
                    n_bits: int = 254) -> PoseidonParams:
    """Derive round constants and MDS matrix from the Grain stream."""
    stream = _grain_bit_stream(1, 0, n_bits, t, full_rounds, partial_rounds)
    constants = []
    while len(constants) < (full_rounds + partial_rounds) * t:
        v = _draw(stream, n_bits)
        if v < P:
            constants.append(v)
    while True:
        xs = [_draw(stream, n_bits) % P for _ in range(t)]
        ys = [_draw(stream, n_bits) % P for _ in range(t)]
        if len(set(xs + ys)) == 2 * t and all((x + y) % P for x in xs for y in ys):
            break
    mds = tuple(
        tuple(pow((xs[i] + ys[j]) % P, P - 2, P) for j in range(t))
        for i in range(t)
    )
    return PoseidonParams(t, full_rounds, partial_rounds, 5,
                          tuple(constants), mds)


DEFAULT_PARAMS = generate_params()


def _permute_general(state, params: PoseidonParams):
    t = params.t
    rc = params.round_constants
    mds = params.mds
    half = params.full_rounds // 2
    partial_end = half + params.partial_rounds
    state = [s % P for s in state]
    for r in range(params.full_rounds + params.partial_rounds):
        base = r * t
        state = [(state[i] + rc[base + i]) % P for i in range(t)]
        if half <= r < partial_end:
            x = state[0]
            x2 = x * x % P
            state[0] = x2 * x2 % P * x % P
        else:
            for i in range(t):
                x = state[i]
                x2 = x * x % P
                state[i] = x2 * x2 % P * x % P
        state = [
            sum(mds[i][j] * state[j] for j in range(t)) % P
            for i in range(t)
        ]
    return state


def _permute_w3(s0: int, s1: int, s2: int, params: PoseidonParams):
    """Unrolled width-3 permutation on raw residues (hot path)."""
    rc = params.round_constants
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = params.mds
    half = params.full_rounds // 2
    partial_end = half + params.partial_rounds
    idx = 0
    for r in range(params.full_rounds + params.partial_rounds):
        s0 = (s0 + rc[idx]) % P
        s1 = (s1 + rc[idx + 1]) % P
        s2 = (s2 + rc[idx + 2]) % P
        idx += 3
        x2 = s0 * s0 % P
        s0 = x2 * x2 % P * s0 % P
        if not half <= r < partial_end:
            x2 = s1 * s1 % P
            s1 = x2 * x2 % P * s1 % P
            x2 = s2 * s2 % P
            s2 = x2 * x2 % P * s2 % P
        s0, s1, s2 = (
            (m00 * s0 + m01 * s1 + m02 * s2) % P,
            (m10 * s0 + m11 * s1 + m12 * s2) % P,
            (m20 * s0 + m21 * s1 + m22 * s2) % P,
        )
    return s0, s1, s2


def permute(state, params: PoseidonParams = DEFAULT_PARAMS):
    """Apply the full permutation to a width-t list of int residues."""
    if len(state) != params.t:
        raise ValueError(f"state width must be {params.t}")
    if params.t == 3:
        return list(_permute_w3(state[0] % P, state[1] % P, state[2] % P, params))
    return _permute_general(state, params)


def compress(left: int, right: int, params: PoseidonParams = DEFAULT_PARAMS) -> int:
    """2-to-1 compression: first lane of the permutation on (0, left, right)."""
    if params.t == 3:
        return _permute_w3(0, left % P, right % P, params)[0]
    return permute([0, left % P, right % P], params)[0]


def poseidon_hash(inputs, params: PoseidonParams = DEFAULT_PARAMS) -> FieldElement:
    """Hash a non-empty list of field elements via chained 2-to-1 compression."""
    values = [to_int(v) for v in inputs]
    if not values:
        raise EmptyInput("poseidon_hash requires at least one input")
    if len(values) == 1:
        return FieldElement(compress(values[0], 0, params))
    acc = compress(values[0], values[1], params)
    for v in values[2:]:
        acc = compress(acc, v, params)
    return FieldElement(acc)


def params_to_json(params: PoseidonParams = DEFAULT_PARAMS) -> str:
    """Dump parameters for cross-validation against external references."""
    return json.dumps(
        {
            "prime": str(P),
            "t": params.t,
            "full_rounds": params.full_rounds,
            "partial_rounds": params.partial_rounds,
            "alpha": params.alpha,
            "round_constants": [str(c) for c in params.round_constants],
            "mds": [[str(c) for c in row] for row in params.mds],
        },
        indent=2,
    )

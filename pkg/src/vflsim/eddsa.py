"""EdDSA over babyjubjub with a Poseidon challenge hash.

Messages are always single field elements (a Poseidon digest everywhere in
this system). The nonce is derived deterministically from the secret key and
the message, so signing is reproducible and the simulation needs no RNG on
the signing path. The challenge is ``H(R.x, R.y, A.x, A.y, msg)`` computed
with the chained Poseidon hash, which keeps the in-circuit verifier on a
single hash function.
"""

from __future__ import annotations

from dataclasses import dataclass

from .curve import BASE_POINT, SUBGROUP_ORDER, CurvePoint, _add_raw, scalar_mul
from .errors import OffCurveInput
from .fields import to_int
from .poseidon import poseidon_hash


@dataclass(frozen=True)
class Signature:
    """EdDSA signature pair: curve point R and scalar S below the subgroup order."""

    r: CurvePoint
    s: int


def challenge(r: CurvePoint, pk: CurvePoint, msg: int) -> int:
    return poseidon_hash([r.x, r.y, pk.x, pk.y, msg]).value


def eddsa_sign(sk: int, msg) -> Signature:
    """Sign a field-element message with deterministic nonce derivation."""
    msg = to_int(msg)
    nonce = poseidon_hash([sk, msg]).value % SUBGROUP_ORDER
    if nonce == 0:  # unreachable in practice; keeps R a valid subgroup point
        nonce = 1
    r_point = scalar_mul(nonce, BASE_POINT)
    pk = scalar_mul(sk, BASE_POINT)
    h = challenge(r_point, pk, msg)
    s = (nonce + h * sk) % SUBGROUP_ORDER
    return Signature(r_point, s)


def eddsa_verify(pk: CurvePoint, msg, sig: Signature) -> bool:
    """Cofactor-8 check: 8*S*B == 8*R + 8*H(R,A,msg)*A."""
    if not pk.is_on_curve():
        raise OffCurveInput("public key off curve")
    if not isinstance(sig, Signature) or not sig.r.is_on_curve():
        return False
    if not 0 <= sig.s < SUBGROUP_ORDER:
        return False
    msg = to_int(msg)
    h = challenge(sig.r, pk, msg)
    left = scalar_mul(8 * sig.s, BASE_POINT)
    right = scalar_mul(8, sig.r)
    ha = scalar_mul(8 * h, pk)
    rx, ry = _add_raw(right.x.value, right.y.value, ha.x.value, ha.y.value)
    return left.x.value == rx and left.y.value == ry

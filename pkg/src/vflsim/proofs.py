"""Setup/prove/verify lifecycle behind a backend-neutral interface.

The reference backend is deliberately neither succinct nor zero-knowledge:
its proof carries the private witness segment, and verification re-runs the
constraint satisfaction check against the verifier's own copy of the
circuit. That preserves every protocol-level integrity property the ledger
relies on (completeness, public-input binding, fail-closed verification)
while keeping the backend swappable for a succinct one.

Keys and proofs are bound to the circuit by the SHA-256 digest of its
canonical serialization; verification against a key from a different
circuit always fails.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import KeyMismatch, SerializationError
from .fields import FIELD_PRIME
from .r1cs import ConstraintSystem, synthesize_witness

BACKEND = "ref-witness"

_PROOF_MAGIC = b"VFLPRF1\n"
_VK_MAGIC = b"VFLVKY1\n"
_PK_MAGIC = b"VFLPKY1\n"
_VERSION = 1


@dataclass(frozen=True)
class ProvingKey:
    digest: bytes
    label: str
    n_pub_in: int
    n_pub_out: int
    n_priv_in: int


@dataclass(frozen=True)
class VerificationKey:
    digest: bytes
    label: str
    cs: ConstraintSystem  # backend payload: the circuit itself

    @property
    def n_pub_in(self):
        return self.cs.n_pub_in

    @property
    def n_pub_out(self):
        return self.cs.n_pub_out

    @property
    def constraint_count(self):
        return self.cs.n_constraints


@dataclass(frozen=True)
class Proof:
    backend: str
    digest: bytes
    public_outputs: tuple
    payload: tuple


def setup(cs: ConstraintSystem):
    """Derive the key pair bound to the circuit digest (deterministic)."""
    digest = cs.digest()
    pk = ProvingKey(digest, cs.label, cs.n_pub_in, cs.n_pub_out, cs.n_priv_in)
    vk = VerificationKey(digest, cs.label, cs)
    return pk, vk


def prove(pk: ProvingKey, cs: ConstraintSystem, public_inputs, private_inputs) -> Proof:
    """Synthesize a witness and wrap it; never emits a proof for an
    unsatisfiable assignment (synthesis raises UnsatisfiableInputs first)."""
    if pk.digest != cs.digest():
        raise KeyMismatch("proving key belongs to a different circuit")
    witness = synthesize_witness(cs, public_inputs, private_inputs)
    outputs = tuple(cs.public_outputs_of(witness.assignment))
    payload = tuple(witness.assignment[1 + cs.num_public:])
    return Proof(BACKEND, pk.digest, outputs, payload)


def verify(vk: VerificationKey, proof: Proof, public_inputs) -> bool:
    """True iff the proof satisfies vk's circuit under the given public
    inputs; returns False (never raises) on any malformed input."""
    try:
        if proof.backend != BACKEND or proof.digest != vk.digest:
            return False
        cs = vk.cs
        if len(public_inputs) != cs.n_pub_in:
            return False
        if len(proof.public_outputs) != cs.n_pub_out:
            return False
        if len(proof.payload) != cs.num_private:
            return False
        z = [1]
        z.extend(int(v) % FIELD_PRIME for v in public_inputs)
        z.extend(int(v) % FIELD_PRIME for v in proof.public_outputs)
        z.extend(int(v) % FIELD_PRIME for v in proof.payload)
        return cs.first_violation(z) is None
    except Exception:
        return False


# --- serialization ------------------------------------------------------------

def _pack_elems(values) -> bytes:
    return b"".join(int(v).to_bytes(32, "big") for v in values)


def _unpack_elems(data: bytes, count: int, offset: int):
    values = []
    for _ in range(count):
        values.append(int.from_bytes(data[offset:offset + 32], "big"))
        offset += 32
    return values, offset


def proof_to_bytes(proof: Proof) -> bytes:
    backend_b = proof.backend.encode("utf-8")
    return b"".join([
        _PROOF_MAGIC,
        struct.pack(">HH", _VERSION, len(backend_b)),
        backend_b,
        proof.digest,
        struct.pack(">IQ", len(proof.public_outputs), len(proof.payload)),
        _pack_elems(proof.public_outputs),
        _pack_elems(proof.payload),
    ])


def proof_from_bytes(data: bytes) -> Proof:
    try:
        if data[:8] != _PROOF_MAGIC:
            raise SerializationError("bad proof magic")
        version, backend_len = struct.unpack(">HH", data[8:12])
        if version != _VERSION:
            raise SerializationError(f"unsupported proof version {version}")
        off = 12
        backend = data[off:off + backend_len].decode("utf-8")
        off += backend_len
        digest = data[off:off + 32]
        off += 32
        n_out, n_payload = struct.unpack(">IQ", data[off:off + 12])
        off += 12
        outputs, off = _unpack_elems(data, n_out, off)
        payload, off = _unpack_elems(data, n_payload, off)
        if off != len(data):
            raise SerializationError("trailing proof bytes")
        return Proof(backend, digest, tuple(outputs), tuple(payload))
    except (struct.error, IndexError, UnicodeDecodeError) as exc:
        raise SerializationError(str(exc)) from exc


def vk_to_bytes(vk: VerificationKey) -> bytes:
    cs_bytes = vk.cs.to_bytes()
    return b"".join([
        _VK_MAGIC,
        struct.pack(">H", _VERSION),
        vk.digest,
        struct.pack(">Q", len(cs_bytes)),
        cs_bytes,
    ])


def vk_from_bytes(data: bytes) -> VerificationKey:
    try:
        if data[:8] != _VK_MAGIC:
            raise SerializationError("bad vk magic")
        (version,) = struct.unpack(">H", data[8:10])
        if version != _VERSION:
            raise SerializationError(f"unsupported vk version {version}")
        digest = data[10:42]
        (cs_len,) = struct.unpack(">Q", data[42:50])
        cs = ConstraintSystem.from_bytes(data[50:50 + cs_len])
        if 50 + cs_len != len(data):
            raise SerializationError("trailing vk bytes")
        if cs.digest() != digest:
            raise SerializationError("vk digest does not match embedded circuit")
        return VerificationKey(digest, cs.label, cs)
    except (struct.error, IndexError) as exc:
        raise SerializationError(str(exc)) from exc


def pk_to_bytes(pk: ProvingKey) -> bytes:
    label_b = pk.label.encode("utf-8")
    return b"".join([
        _PK_MAGIC,
        struct.pack(">HH", _VERSION, len(label_b)),
        label_b,
        pk.digest,
        struct.pack(">III", pk.n_pub_in, pk.n_pub_out, pk.n_priv_in),
    ])


def pk_from_bytes(data: bytes) -> ProvingKey:
    try:
        if data[:8] != _PK_MAGIC:
            raise SerializationError("bad pk magic")
        version, label_len = struct.unpack(">HH", data[8:12])
        if version != _VERSION:
            raise SerializationError(f"unsupported pk version {version}")
        off = 12
        label = data[off:off + label_len].decode("utf-8")
        off += label_len
        digest = data[off:off + 32]
        off += 32
        n_pub_in, n_pub_out, n_priv_in = struct.unpack(">III", data[off:off + 12])
        if off + 12 != len(data):
            raise SerializationError("trailing pk bytes")
        return ProvingKey(digest, label, n_pub_in, n_pub_out, n_priv_in)
    except (struct.error, IndexError, UnicodeDecodeError) as exc:
        raise SerializationError(str(exc)) from exc

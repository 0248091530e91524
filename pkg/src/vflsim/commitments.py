"""Poseidon Merkle commitments over data batches and hiding device handles.

Leaf layout is fixed so devices and circuits agree bit-exactly: the nine
feature values in dataset column order (as offset-encoded field elements,
see ``fixedpoint.to_field``), then the class label. Batches are padded to the
next power of two with zero leaves; the real leaf count travels next to the
root so padding cannot masquerade as data.
"""

from __future__ import annotations

from dataclasses import dataclass

from .curve import CurvePoint
from .errors import EmptyBatch, OffCurveInput
from .fields import FieldElement, to_int
from .fixedpoint import Fixed, to_field
from .poseidon import DEFAULT_PARAMS, PoseidonParams, compress, poseidon_hash

NUM_FEATURES = 9
NUM_CLASSES = 6


@dataclass(frozen=True)
class DataRecord:
    """One sensor reading: nine fixed-point features and a class label in 0..5."""

    features: tuple
    label: int

    def __post_init__(self):
        if len(self.features) != NUM_FEATURES:
            raise ValueError(f"expected {NUM_FEATURES} features, got {len(self.features)}")
        if not all(isinstance(f, Fixed) for f in self.features):
            raise TypeError("features must be Fixed values")
        if not 0 <= self.label < NUM_CLASSES:
            raise ValueError(f"label must be in 0..{NUM_CLASSES - 1}")


@dataclass(frozen=True)
class MerkleCommitment:
    """Root of the padded Poseidon tree plus the real leaf count."""

    root: FieldElement
    depth: int
    leaf_count: int


@dataclass(frozen=True)
class DeviceHandle:
    """Salted commitment to a device public key; the only on-ledger device id."""

    value: FieldElement


def leaf_hash(record: DataRecord, params: PoseidonParams = DEFAULT_PARAMS) -> FieldElement:
    """Chained 2-to-1 Poseidon over the ten leaf elements, label last."""
    elems = [to_field(f) for f in record.features]
    elems.append(record.label)
    return poseidon_hash(elems, params)


def merkle_root(leaves, params: PoseidonParams = DEFAULT_PARAMS) -> MerkleCommitment:
    """Binary Poseidon tree over the leaves, zero-padded to a power of two."""
    values = [to_int(leaf) for leaf in leaves]
    if not values:
        raise EmptyBatch("merkle_root requires at least one leaf")
    leaf_count = len(values)
    depth = max(1, (leaf_count - 1).bit_length())
    values.extend([0] * ((1 << depth) - leaf_count))
    while len(values) > 1:
        values = [
            compress(values[i], values[i + 1], params)
            for i in range(0, len(values), 2)
        ]
    return MerkleCommitment(FieldElement(values[0]), depth, leaf_count)


def batch_commitment(records, params: PoseidonParams = DEFAULT_PARAMS) -> MerkleCommitment:
    return merkle_root([leaf_hash(r, params) for r in records], params)


def device_handle(pk: CurvePoint, salt, params: PoseidonParams = DEFAULT_PARAMS) -> DeviceHandle:
    """Hiding commitment to a device public key; the salt stays with the worker."""
    if not pk.is_on_curve():
        raise OffCurveInput("device public key off curve")
    return DeviceHandle(poseidon_hash([pk.x, pk.y, salt], params))

"""Scalar-field arithmetic for the BN254 embedding.

Every committed, hashed, or signed value in the system is a residue modulo
``FIELD_PRIME`` (the BN254 scalar-field prime, which is also the base field of
the babyjubjub curve). Hot paths operate on plain ints; ``FieldElement`` is
the canonical-form wrapper used at API boundaries.
"""

from __future__ import annotations

from .errors import DivisionByZero

FIELD_PRIME = 21888242871839275222246405745257275088548364400416034343698204186575808495617


def to_int(value: "FieldElement | int") -> int:
    """Coerce a field element or int to its canonical residue."""
    if isinstance(value, FieldElement):
        return value.value
    return value % FIELD_PRIME


def field_inv(value: int) -> int:
    v = value % FIELD_PRIME
    if v == 0:
        raise DivisionByZero("cannot invert 0")
    return pow(v, FIELD_PRIME - 2, FIELD_PRIME)


class FieldElement:
    """Residue modulo the BN254 scalar prime, always in canonical form."""

    __slots__ = ("value",)

    def __init__(self, value: "FieldElement | int"):
        self.value = to_int(value)

    def __add__(self, other):
        return FieldElement(self.value + to_int(other))

    def __radd__(self, other):
        return FieldElement(self.value + to_int(other))

    def __sub__(self, other):
        return FieldElement(self.value - to_int(other))

    def __rsub__(self, other):
        return FieldElement(to_int(other) - self.value)

    def __mul__(self, other):
        return FieldElement(self.value * to_int(other))

    def __rmul__(self, other):
        return FieldElement(self.value * to_int(other))

    def __neg__(self):
        return FieldElement(-self.value)

    def __pow__(self, exponent: int):
        return FieldElement(pow(self.value, exponent, FIELD_PRIME))

    def __truediv__(self, other):
        return FieldElement(self.value * field_inv(to_int(other)))

    def inverse(self) -> "FieldElement":
        return FieldElement(field_inv(self.value))

    def __eq__(self, other) -> bool:
        if not isinstance(other, (FieldElement, int)):
            return NotImplemented
        return self.value == to_int(other)

    def __hash__(self) -> int:
        return hash(self.value)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElement({self.value})"


ZERO = FieldElement(0)
ONE = FieldElement(1)

"""The babyjubjub twisted-Edwards curve embedded in the BN254 scalar field.

Curve equation: ``a*x^2 + y^2 = 1 + d*x^2*y^2`` with the standard constants
below. ``BASE_POINT`` generates the prime-order subgroup (cofactor 8 already
cleared); all key material lives in that subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OffCurveInput
from .fields import FIELD_PRIME, FieldElement, field_inv, to_int

P = FIELD_PRIME

EDWARDS_A = 168700
EDWARDS_D = 168696

# Order of the full curve group is 8 * SUBGROUP_ORDER.
SUBGROUP_ORDER = 2736030358979909402780800718157159386076813972158567259200215660948447373041
COFACTOR = 8


class CurvePoint:
    """Affine point on babyjubjub; (0, 1) is the group identity."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = FieldElement(x)
        self.y = FieldElement(y)

    def is_on_curve(self) -> bool:
        x, y = self.x.value, self.y.value
        x2 = x * x % P
        y2 = y * y % P
        return (EDWARDS_A * x2 + y2) % P == (1 + EDWARDS_D * x2 % P * y2) % P

    def is_identity(self) -> bool:
        return self.x.value == 0 and self.y.value == 1

    def neg(self) -> "CurvePoint":
        return CurvePoint(-self.x.value % P, self.y.value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CurvePoint):
            return NotImplemented
        return self.x.value == other.x.value and self.y.value == other.y.value

    def __hash__(self) -> int:
        return hash((self.x.value, self.y.value))

    def __repr__(self) -> str:
        return f"CurvePoint({self.x.value}, {self.y.value})"


IDENTITY = CurvePoint(0, 1)

# Generator of the prime-order subgroup (the full-group generator times 8).
BASE_POINT = CurvePoint(
    5299619240641551281634865583518297030282874472190772894086521144482721001553,
    16950150798460657717958625567821834550301663161624707787222815936182638968203,
)


def _add_raw(x1: int, y1: int, x2: int, y2: int):
    """Unified twisted-Edwards addition on raw residues."""
    x1x2 = x1 * x2 % P
    y1y2 = y1 * y2 % P
    dxy = EDWARDS_D * x1x2 % P * y1y2 % P
    x3 = (x1 * y2 + y1 * x2) % P * field_inv(1 + dxy) % P
    y3 = (y1y2 - EDWARDS_A * x1x2) % P * field_inv(1 - dxy) % P
    return x3, y3


def curve_add(p: CurvePoint, q: CurvePoint) -> CurvePoint:
    """Complete point addition; raises OffCurveInput on invalid operands."""
    if not p.is_on_curve():
        raise OffCurveInput(f"left operand off curve: {p!r}")
    if not q.is_on_curve():
        raise OffCurveInput(f"right operand off curve: {q!r}")
    x3, y3 = _add_raw(p.x.value, p.y.value, q.x.value, q.y.value)
    return CurvePoint(x3, y3)


def scalar_mul(k: int, p: CurvePoint) -> CurvePoint:
    """Double-and-add scalar multiplication."""
    if not p.is_on_curve():
        raise OffCurveInput(f"point off curve: {p!r}")
    k = int(k)
    if k < 0:
        return scalar_mul(-k, p.neg())
    rx, ry = 0, 1
    ax, ay = p.x.value, p.y.value
    while k:
        if k & 1:
            rx, ry = _add_raw(rx, ry, ax, ay)
        ax, ay = _add_raw(ax, ay, ax, ay)
        k >>= 1
    return CurvePoint(rx, ry)


@dataclass(frozen=True)
class KeyPair:
    """Secret scalar below the subgroup order and its public point."""

    secret: int
    public: CurvePoint

    @classmethod
    def generate(cls, rng) -> "KeyPair":
        secret = rng.randrange(1, SUBGROUP_ORDER)
        return cls(secret, scalar_mul(secret, BASE_POINT))

    @classmethod
    def from_secret(cls, secret: int) -> "KeyPair":
        secret = int(secret) % SUBGROUP_ORDER
        if secret == 0:
            raise ValueError("secret scalar must be nonzero")
        return cls(secret, scalar_mul(secret, BASE_POINT))

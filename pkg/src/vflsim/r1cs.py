"""Rank-1 constraint systems with deterministic witness synthesis.

A constraint is a triple of sparse linear combinations (A, B, C) over the
assignment vector z with semantics <A,z> * <B,z> = <C,z>. Variable 0 is the
constant one; public inputs, public outputs, declared private inputs, and
auxiliary variables follow in that order.

Circuits are built once through ``CircuitBuilder``: gadgets allocate
auxiliary variables together with evaluation hints, so a finished system can
re-derive every intermediate value from the declared inputs. Satisfaction
checking is vectorized over flattened term arrays, which is what makes
desk-scale proving of the learning circuit practical.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityMismatch,
    LengthMismatch,
    SerializationError,
    UnsatisfiableInputs,
)
from .fields import FIELD_PRIME

P = FIELD_PRIME
_HALF_P = P // 2

_MAGIC = b"VFLECS1\n"
_VERSION = 1


class LC:
    """Immutable sparse linear combination; constants ride on variable 0."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms = tuple(terms)

    def __add__(self, other):
        if isinstance(other, int):
            other = LC(((0, other % P),))
        acc = {}
        for v, c in self.terms:
            acc[v] = (acc.get(v, 0) + c) % P
        for v, c in other.terms:
            acc[v] = (acc.get(v, 0) + c) % P
        return LC(tuple((v, c) for v, c in acc.items() if c))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = LC(((0, other % P),))
        return self + other.scale(P - 1)

    def __rsub__(self, other):
        return LC(((0, other % P),)) + self.scale(P - 1)

    def scale(self, k: int) -> "LC":
        k %= P
        if k == 0:
            return LC()
        return LC(tuple((v, c * k % P) for v, c in self.terms))

    def __mul__(self, k: int) -> "LC":
        return self.scale(k)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(P - 1)


def lc_const(value: int) -> LC:
    value %= P
    return LC(((0, value),)) if value else LC()


def lc_var(var: int, coeff: int = 1) -> LC:
    return LC(((var, coeff % P),))


ONE_LC = lc_var(0)


def _signed(value: int) -> int:
    """Interpret a canonical residue as a signed integer near zero."""
    return value - P if value > _HALF_P else value


# Hint op tags interpreted during synthesis.
_OP_MUL = 0  # target = eval(a) * eval(b)
_OP_DIV = 1  # target = eval(num) / eval(den)
_OP_LC = 2  # target = eval(lc)
_OP_TQ = 3  # target = signed(eval(a) * eval(b)) >> shift
_OP_BITS = 4  # n targets = little-endian bits of eval(lc)
_OP_RBITS = 5  # n targets = bits of (signed(eval(a) * eval(b)) mod 2^n)


@dataclass(frozen=True)
class Witness:
    """Full variable assignment for a constraint system."""

    assignment: tuple

    def __len__(self):
        return len(self.assignment)


class ConstraintSystem:
    """Finished circuit: flattened constraints plus the synthesis schedule."""

    def __init__(self, label, n_pub_in, n_pub_out, n_priv_in, n_vars,
                 matrices, schedule=None):
        self.label = label
        self.n_pub_in = n_pub_in
        self.n_pub_out = n_pub_out
        self.n_priv_in = n_priv_in
        self.n_vars = n_vars
        # matrices: three (indptr, idx, coeffs) triples of numpy arrays
        self.matrices = matrices
        self.schedule = schedule
        self.n_constraints = len(matrices[0][0]) - 1
        self._digest = None
        self._bytes = None

    @property
    def num_public(self) -> int:
        return self.n_pub_in + self.n_pub_out

    @property
    def num_private(self) -> int:
        return self.n_vars - 1 - self.num_public

    def output_indices(self):
        start = 1 + self.n_pub_in
        return range(start, start + self.n_pub_out)

    def public_outputs_of(self, assignment):
        return [assignment[i] for i in self.output_indices()]

    def _eval_matrix(self, z_arr, matrix):
        indptr, idx, coeffs = matrix
        if len(idx) == 0:
            return np.zeros(0, dtype=object)
        sums = np.add.reduceat(z_arr[idx] * coeffs, indptr[:-1])
        return sums % P

    def residuals(self, assignment):
        """Per-constraint A*B - C residues (zero means satisfied)."""
        if len(assignment) != self.n_vars:
            raise LengthMismatch(
                f"assignment has {len(assignment)} vars, circuit has {self.n_vars}")
        if self.n_constraints == 0:
            return np.zeros(0, dtype=object)
        z_arr = np.array(assignment, dtype=object)
        a = self._eval_matrix(z_arr, self.matrices[0])
        b = self._eval_matrix(z_arr, self.matrices[1])
        c = self._eval_matrix(z_arr, self.matrices[2])
        return (a * b - c) % P

    def first_violation(self, assignment):
        res = self.residuals(assignment)
        bad = np.nonzero(res)[0]
        return int(bad[0]) if len(bad) else None

    def to_bytes(self) -> bytes:
        if self._bytes is not None:
            return self._bytes
        label_b = self.label.encode("utf-8")
        parts = [
            _MAGIC,
            struct.pack(">HH", _VERSION, len(label_b)),
            label_b,
            struct.pack(">IIIQQ", self.n_pub_in, self.n_pub_out,
                        self.n_priv_in, self.n_vars, self.n_constraints),
        ]
        for indptr, idx, coeffs in self.matrices:
            parts.append(struct.pack(">Q", len(idx)))
            parts.append(np.asarray(indptr, dtype=np.int64).astype(">u8").tobytes())
            parts.append(np.asarray(idx, dtype=np.int64).astype(">u8").tobytes())
            parts.append(b"".join(int(c).to_bytes(32, "big") for c in coeffs))
        self._bytes = b"".join(parts)
        return self._bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "ConstraintSystem":
        try:
            if data[:8] != _MAGIC:
                raise SerializationError("bad magic")
            version, label_len = struct.unpack(">HH", data[8:12])
            if version != _VERSION:
                raise SerializationError(f"unsupported version {version}")
            off = 12
            label = data[off:off + label_len].decode("utf-8")
            off += label_len
            n_pub_in, n_pub_out, n_priv_in, n_vars, n_constraints = struct.unpack(
                ">IIIQQ", data[off:off + 28])
            off += 28
            matrices = []
            for _ in range(3):
                (n_terms,) = struct.unpack(">Q", data[off:off + 8])
                off += 8
                ip_len = 8 * (n_constraints + 1)
                indptr = np.frombuffer(data[off:off + ip_len], dtype=">u8").astype(np.int64)
                off += ip_len
                idx = np.frombuffer(data[off:off + 8 * n_terms], dtype=">u8").astype(np.int64)
                off += 8 * n_terms
                coeffs = np.empty(n_terms, dtype=object)
                for i in range(n_terms):
                    coeffs[i] = int.from_bytes(data[off:off + 32], "big")
                    off += 32
                matrices.append((indptr, idx, coeffs))
            if off != len(data):
                raise SerializationError("trailing bytes")
            return cls(label, n_pub_in, n_pub_out, n_priv_in, n_vars,
                       tuple(matrices))
        except (struct.error, IndexError, UnicodeDecodeError) as exc:
            raise SerializationError(str(exc)) from exc

    def digest(self) -> bytes:
        if self._digest is None:
            self._digest = hashlib.sha256(self.to_bytes()).digest()
        return self._digest


def check_satisfaction(cs: ConstraintSystem, witness) -> bool:
    """True iff every constraint holds for the assignment."""
    assignment = witness.assignment if isinstance(witness, Witness) else witness
    return cs.first_violation(assignment) is None


def _eval(z, vars_, coeffs):
    s = 0
    for v, c in zip(vars_, coeffs):
        s += z[v] * c
    return s % P


def synthesize_witness(cs: ConstraintSystem, public, private) -> Witness:
    """Derive the full assignment from declared inputs and check it.

    Raises UnsatisfiableInputs naming the first violated constraint when the
    inputs are inconsistent with the circuit.
    """
    if cs.schedule is None:
        raise ArityMismatch("constraint system carries no synthesis schedule")
    if len(public) != cs.n_pub_in:
        raise ArityMismatch(
            f"expected {cs.n_pub_in} public inputs, got {len(public)}")
    if len(private) != cs.n_priv_in:
        raise ArityMismatch(
            f"expected {cs.n_priv_in} private inputs, got {len(private)}")
    z = [0] * cs.n_vars
    z[0] = 1
    pos = 1
    for v in public:
        z[pos] = int(v) % P
        pos += 1
    pos += cs.n_pub_out
    for v in private:
        z[pos] = int(v) % P
        pos += 1
    for op in cs.schedule:
        tag = op[0]
        if tag == _OP_MUL:
            _, t, av, ac, bv, bc = op
            z[t] = _eval(z, av, ac) * _eval(z, bv, bc) % P
        elif tag == _OP_TQ:
            _, t, av, ac, bv, bc, shift = op
            prod = _signed(_eval(z, av, ac)) * _signed(_eval(z, bv, bc))
            z[t] = (prod >> shift) % P
        elif tag == _OP_BITS:
            _, start, n, lv, lcf = op
            value = _eval(z, lv, lcf)
            for i in range(n):
                z[start + i] = (value >> i) & 1
        elif tag == _OP_RBITS:
            _, start, n, av, ac, bv, bc = op
            prod = _signed(_eval(z, av, ac)) * _signed(_eval(z, bv, bc))
            rem = prod & ((1 << n) - 1)
            for i in range(n):
                z[start + i] = (rem >> i) & 1
        elif tag == _OP_LC:
            _, t, lv, lcf = op
            z[t] = _eval(z, lv, lcf)
        elif tag == _OP_DIV:
            _, t, nv, nc, dv, dc, cidx = op
            den = _eval(z, dv, dc)
            if den == 0:
                raise UnsatisfiableInputs(cidx, "zero denominator during synthesis")
            z[t] = _eval(z, nv, nc) * pow(den, P - 2, P) % P
        else:  # pragma: no cover - builder emits only known tags
            raise AssertionError(f"unknown hint tag {tag}")
    bad = cs.first_violation(z)
    if bad is not None:
        raise UnsatisfiableInputs(bad)
    return Witness(tuple(z))


class CircuitBuilder:
    """Accumulates constraints and synthesis hints, then freezes them."""

    def __init__(self, label: str):
        self.label = label
        self._n_pub_in = 0
        self._n_pub_out = 0
        self._n_priv_in = 0
        self._inputs_frozen = False
        self._next = 1
        self._constraints = []
        self._hints = []
        self._out_bound = set()

    # --- variable declaration -------------------------------------------

    def _declare(self, count):
        if self._inputs_frozen:
            raise RuntimeError("inputs must be declared before gadget logic")
        start = self._next
        self._next += count
        return start

    def public_inputs(self, count: int):
        start = self._declare(count)
        self._n_pub_in += count
        return [lc_var(start + i) for i in range(count)]

    def public_outputs(self, count: int):
        """Reserve output slots; bind each with ``bind_output`` later."""
        start = self._declare(count)
        self._n_pub_out += count
        return list(range(start, start + count))

    def private_inputs(self, count: int):
        start = self._declare(count)
        self._n_priv_in += count
        return [lc_var(start + i) for i in range(count)]

    def aux(self, count: int = 1) -> int:
        self._inputs_frozen = True
        start = self._next
        self._next += count
        return start

    # --- constraints and hints ------------------------------------------

    def enforce(self, a: LC, b: LC, c: LC):
        self._inputs_frozen = True
        self._constraints.append((a, b, c))

    def enforce_eq(self, a: LC, b: LC):
        self.enforce(a - b, ONE_LC, LC())

    def enforce_zero(self, a: LC):
        self.enforce(a, ONE_LC, LC())

    def hint(self, op):
        self._hints.append(op)

    # --- derived allocation helpers --------------------------------------

    def mul(self, a: LC, b: LC) -> LC:
        v = self.aux()
        self.hint((_OP_MUL, v, a, b))
        self.enforce(a, b, lc_var(v))
        return lc_var(v)

    def div(self, num: LC, den: LC) -> LC:
        """v with den * v = num; synthesis fails if den evaluates to zero."""
        v = self.aux()
        self.hint((_OP_DIV, v, num, den, len(self._constraints)))
        self.enforce(den, lc_var(v), num)
        return lc_var(v)

    def alloc_lc(self, value: LC) -> LC:
        """Materialize a linear combination as a fresh variable."""
        v = self.aux()
        self.hint((_OP_LC, v, value))
        self.enforce_eq(value, lc_var(v))
        return lc_var(v)

    def boolean(self, var: int):
        v = lc_var(var)
        self.enforce(v, v, v)

    def alloc_bits(self, value: LC, n: int):
        """Boolean decomposition of value into n bits, recomposition enforced."""
        start = self.aux(n)
        self.hint((_OP_BITS, start, n, value))
        for i in range(n):
            self.boolean(start + i)
        total = LC(tuple((start + i, 1 << i) for i in range(n)))
        self.enforce_eq(total, value)
        return [lc_var(start + i) for i in range(n)]

    def bind_output(self, var_id: int, value: LC):
        if var_id in self._out_bound:
            raise RuntimeError(f"output {var_id} bound twice")
        self._out_bound.add(var_id)
        self.hint((_OP_LC, var_id, value))
        self.enforce_eq(value, lc_var(var_id))

    # --- finishing --------------------------------------------------------

    def _compile_lc(self, value: LC):
        if not value.terms:
            return (0,), (0,)
        vars_, coeffs = zip(*value.terms)
        return vars_, coeffs

    def finish(self) -> ConstraintSystem:
        n_out_expected = self._n_pub_out
        if len(self._out_bound) != n_out_expected:
            raise RuntimeError(
                f"{n_out_expected - len(self._out_bound)} public outputs left unbound")
        intern = {}

        def keep(c):
            got = intern.get(c)
            if got is None:
                intern[c] = c
                got = c
            return got

        matrices = []
        for side in range(3):
            indptr = np.empty(len(self._constraints) + 1, dtype=np.int64)
            idx = []
            coeffs = []
            indptr[0] = 0
            for i, constraint in enumerate(self._constraints):
                terms = constraint[side].terms
                if terms:
                    for v, c in terms:
                        idx.append(v)
                        coeffs.append(keep(c))
                else:
                    idx.append(0)
                    coeffs.append(0)
                indptr[i + 1] = len(idx)
            arr = np.empty(len(coeffs), dtype=object)
            arr[:] = coeffs
            matrices.append((indptr, np.array(idx, dtype=np.int64), arr))

        schedule = []
        for op in self._hints:
            tag = op[0]
            if tag in (_OP_MUL,):
                _, t, a, b = op
                schedule.append((tag, t, *self._compile_lc(a), *self._compile_lc(b)))
            elif tag == _OP_DIV:
                _, t, num, den, cidx = op
                schedule.append((tag, t, *self._compile_lc(num), *self._compile_lc(den), cidx))
            elif tag == _OP_LC:
                _, t, value = op
                schedule.append((tag, t, *self._compile_lc(value)))
            elif tag == _OP_TQ:
                _, t, a, b, shift = op
                schedule.append((tag, t, *self._compile_lc(a), *self._compile_lc(b), shift))
            elif tag == _OP_BITS:
                _, start, n, value = op
                schedule.append((tag, start, n, *self._compile_lc(value)))
            elif tag == _OP_RBITS:
                _, start, n, a, b = op
                schedule.append((tag, start, n, *self._compile_lc(a), *self._compile_lc(b)))
            else:  # pragma: no cover
                raise AssertionError(f"unknown hint tag {tag}")

        return ConstraintSystem(
            self.label,
            self._n_pub_in,
            self._n_pub_out,
            self._n_priv_in,
            self._next,
            tuple(matrices),
            tuple(schedule),
        )

    # Low-level hint constructors used by gadgets.

    def hint_trunc_quotient(self, target: int, a: LC, b: LC, shift: int):
        self.hint((_OP_TQ, target, a, b, shift))

    def hint_rem_bits(self, start: int, n: int, a: LC, b: LC):
        self.hint((_OP_RBITS, start, n, a, b))

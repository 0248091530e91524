import random

import pytest

from vflsim.errors import ArityMismatch, LengthMismatch, SerializationError, UnsatisfiableInputs
from vflsim.fields import FIELD_PRIME
from vflsim.r1cs import (
    LC,
    CircuitBuilder,
    ConstraintSystem,
    Witness,
    check_satisfaction,
    lc_const,
    synthesize_witness,
)

P = FIELD_PRIME


def cubic_circuit():
    """Knowledge of x with x^3 + x + 5 = out (public output)."""
    b = CircuitBuilder("cubic")
    (out,) = b.public_outputs(1)
    (x,) = b.private_inputs(1)
    x2 = b.mul(x, x)
    x3 = b.mul(x2, x)
    b.bind_output(out, x3 + x + 5)
    return b.finish()


def test_cubic_witness():
    cs = cubic_circuit()
    w = synthesize_witness(cs, [], [3])
    assert w.assignment[list(cs.output_indices())[0]] == 35
    assert check_satisfaction(cs, w)


def test_variable_partition_bookkeeping():
    cs = cubic_circuit()
    assert cs.n_pub_in == 0 and cs.n_pub_out == 1 and cs.n_priv_in == 1
    assert cs.num_public + cs.num_private + 1 == cs.n_vars


def test_arity_checks():
    cs = cubic_circuit()
    with pytest.raises(ArityMismatch):
        synthesize_witness(cs, [1], [3])
    with pytest.raises(ArityMismatch):
        synthesize_witness(cs, [], [3, 4])


def test_flip_one_assignment_element_fails():
    cs = cubic_circuit()
    w = synthesize_witness(cs, [], [3])
    z = list(w.assignment)
    for pos in range(1, len(z)):
        mutated = list(z)
        mutated[pos] = (mutated[pos] + 1) % P
        assert not check_satisfaction(cs, mutated), f"position {pos}"


def test_mutation_sweep_on_larger_circuit():
    b = CircuitBuilder("chain")
    (inp,) = b.private_inputs(1)
    acc = inp
    for _ in range(120):
        acc = b.mul(acc, inp)
    b2 = b.finish()
    w = synthesize_witness(b2, [], [7])
    rng = random.Random(12)
    for _ in range(100):
        pos = rng.randrange(1, b2.n_vars)
        z = list(w.assignment)
        z[pos] = (z[pos] + rng.randrange(1, P)) % P
        assert not check_satisfaction(b2, z)


def test_empty_constraint_list_vacuous():
    b = CircuitBuilder("empty")
    b.private_inputs(2)
    cs = b.finish()
    assert check_satisfaction(cs, [1, 5, 9])
    w = synthesize_witness(cs, [], [5, 9])
    assert w.assignment == (1, 5, 9)


def test_length_mismatch():
    cs = cubic_circuit()
    with pytest.raises(LengthMismatch):
        check_satisfaction(cs, [1, 2])


def test_unsatisfiable_reports_first_constraint():
    b = CircuitBuilder("forced")
    (x,) = b.private_inputs(1)
    b.enforce_eq(x, lc_const(9))
    b.enforce_eq(x, lc_const(10))
    cs = b.finish()
    with pytest.raises(UnsatisfiableInputs) as info:
        synthesize_witness(cs, [], [9])
    assert info.value.constraint_index == 1
    with pytest.raises(UnsatisfiableInputs) as info:
        synthesize_witness(cs, [], [8])
    assert info.value.constraint_index == 0


def test_div_gadget_and_zero_denominator():
    b = CircuitBuilder("div")
    x, y = b.private_inputs(2)
    b.div(x, y)
    cs = b.finish()
    w = synthesize_witness(cs, [], [6, 3])
    assert w.assignment[3] == 2
    with pytest.raises(UnsatisfiableInputs):
        synthesize_witness(cs, [], [6, 0])


def test_bits_decomposition():
    b = CircuitBuilder("bits")
    (x,) = b.private_inputs(1)
    b.alloc_bits(x, 8)
    cs = b.finish()
    w = synthesize_witness(cs, [], [173])
    assert [w.assignment[2 + i] for i in range(8)] == [1, 0, 1, 1, 0, 1, 0, 1]
    with pytest.raises(UnsatisfiableInputs):
        synthesize_witness(cs, [], [256])  # out of range for 8 bits


def test_build_determinism():
    a = cubic_circuit().to_bytes()
    b = cubic_circuit().to_bytes()
    assert a == b


def test_serialization_roundtrip_and_digest():
    cs = cubic_circuit()
    data = cs.to_bytes()
    back = ConstraintSystem.from_bytes(data)
    assert back.label == cs.label
    assert back.n_constraints == cs.n_constraints
    assert back.n_vars == cs.n_vars
    assert back.to_bytes() == data
    assert back.digest() == cs.digest()
    # deserialized system checks satisfaction but cannot synthesize
    w = synthesize_witness(cs, [], [2])
    assert check_satisfaction(back, w)
    with pytest.raises(ArityMismatch):
        synthesize_witness(back, [], [2])


def test_coefficient_mutation_changes_digest():
    cs = cubic_circuit()
    data = bytearray(cs.to_bytes())
    data[-1] ^= 1  # last coefficient byte
    mutated = ConstraintSystem.from_bytes(bytes(data))
    assert mutated.digest() != cs.digest()


def test_malformed_bytes_rejected():
    with pytest.raises(SerializationError):
        ConstraintSystem.from_bytes(b"garbage")
    data = cubic_circuit().to_bytes()
    with pytest.raises(SerializationError):
        ConstraintSystem.from_bytes(data[:-3])


def test_lc_algebra():
    a = lc_const(5) + LC(((1, 2),))
    b = a - lc_const(5)
    assert sorted(b.terms) == [(1, 2)]
    c = a.scale(0)
    assert c.terms == ()
    d = LC(((1, 1),)) + LC(((1, P - 1),))
    assert d.terms == ()


def test_witness_len():
    cs = cubic_circuit()
    w = synthesize_witness(cs, [], [4])
    assert len(w) == cs.n_vars
    assert isinstance(w, Witness)

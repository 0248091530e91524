"""Shared fixtures: expensive circuits are built once per session."""

import random

import pytest

from vflsim.circuits import build_learning_circuit, build_registration_circuit
from vflsim.commitments import DataRecord, batch_commitment
from vflsim.curve import KeyPair
from vflsim.eddsa import eddsa_sign
from vflsim.fixedpoint import Fixed, LearningBatch, SCALE
from vflsim.poseidon import poseidon_hash
from vflsim.proofs import setup


def random_record(rng, signed=False):
    lo = -SCALE if signed else 0
    return DataRecord(
        tuple(Fixed(rng.randrange(lo, SCALE)) for _ in range(9)),
        rng.randrange(6),
    )


def signed_batch(device_keys, records, counter):
    commitment = batch_commitment(records)
    message = poseidon_hash([commitment.root, counter])
    signature = eddsa_sign(device_keys.secret, message)
    return LearningBatch(tuple(records), counter, commitment, signature)


@pytest.fixture(scope="session")
def registration_circuit():
    return build_registration_circuit()


@pytest.fixture(scope="session")
def registration_keys(registration_circuit):
    return setup(registration_circuit)


@pytest.fixture(scope="session")
def learning_circuit_3():
    return build_learning_circuit(3)


@pytest.fixture(scope="session")
def learning_keys_3(learning_circuit_3):
    return setup(learning_circuit_3)


@pytest.fixture()
def rng():
    return random.Random(0xC0FFEE)

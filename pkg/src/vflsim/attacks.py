"""Adversarial fixtures: one per attack, mapped onto the three objectives.

Obj1 (aggregation integrity): counter replay and unregistered-handle
submissions must die at the contracts. Obj2 (learning integrity): a local
model that is not the true gradient update must be unprovable or rejected.
Obj3 (data authenticity): rogue certificates, forged batch signatures, and
post-signing data tampering must fail at proving or verification.

Every fixture reports where the attack died (proving vs ledger) and with
which code; the suite fails closed if any fixture is accepted. A full honest
round runs first as the control.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .actors import CertificateAuthority, Device, Worker
from .circuits import (
    REGISTRATION_LABEL,
    build_learning_circuit,
    build_registration_circuit,
    learning_label,
    learning_private_inputs,
    learning_public_inputs,
    registration_private_inputs,
    registration_public_inputs,
)
from .commitments import DataRecord, device_handle
from .curve import KeyPair
from .eddsa import eddsa_sign
from .errors import RunInvariantError, UnsatisfiableInputs
from .fixedpoint import DEFAULT_LEARNING_RATE, Fixed, local_learn
from .ledger import (
    PROOF_INVALID,
    REGISTER_DEVICE,
    REPLAYED_COUNTER,
    ROOT_KEY_MISMATCH,
    SUBMIT_UPDATE,
    UNKNOWN_HANDLE,
    Ledger,
    Transaction,
)
from .dataset import synthetic_blobs
from .fixedpoint import ModelParams
from .poseidon import poseidon_hash
from .proofs import prove, proof_to_bytes, setup


@dataclass(frozen=True)
class AttackOutcome:
    name: str
    objective: str
    rejected: bool
    stage: str  # "proving" or "ledger"
    code: str
    constraints_checked: int = 0  # verification-cost proxy (0 at proving stage)


class _World:
    """Shared honest environment the fixtures attack."""

    def __init__(self, batch_size: int, seed: int):
        self.batch_size = batch_size
        self.rng = random.Random(seed)
        train, _ = synthetic_blobs(64 * batch_size, seed)
        self.train = train
        self.reg_cs = build_registration_circuit()
        self.learn_cs = build_learning_circuit(batch_size)
        self.reg_pk, self.reg_vk = setup(self.reg_cs)
        self.learn_pk, self.learn_vk = setup(self.learn_cs)
        self.artifacts = {REGISTRATION_LABEL: (self.reg_pk, self.reg_cs),
                          learning_label(batch_size): (self.learn_pk, self.learn_cs)}
        self.ledger = Ledger.create(ModelParams.zero(), cycle_length_blocks=4)
        self.ca = CertificateAuthority(KeyPair.generate(self.rng))
        self.ledger.anchor_root_key(self.ca.root.public)
        self.ledger.register_vk(self.reg_vk)
        self.ledger.register_vk(self.learn_vk)

    def shard(self, n_batches: int = 4):
        take = n_batches * self.batch_size
        shard, self.train = self.train[:take], self.train[take:]
        return shard

    def new_registered_pair(self):
        worker = Worker(f"worker-{self.rng.randrange(1 << 30)}", self.ledger,
                        self.rng, self.artifacts)
        keys = KeyPair.generate(self.rng)
        device = Device(keys, self.ca.issue(keys.public), self.shard())
        receipt = worker.register(device, self.ca.root.public)
        if not receipt.accepted:
            raise RunInvariantError(f"fixture registration failed: {receipt.reason}")
        return worker, device


def _control(world: _World) -> AttackOutcome:
    worker, device = world.new_registered_pair()
    receipt = worker.learning_round(device, world.batch_size)
    return AttackOutcome("honest-control", "control", not receipt.accepted,
                         "ledger", receipt.reason, receipt.constraints_checked)


def _rogue_ca(world: _World) -> AttackOutcome:
    """Certificate issued under a different PKI root."""
    rogue = CertificateAuthority(KeyPair.generate(world.rng))
    keys = KeyPair.generate(world.rng)
    cert = rogue.issue(keys.public)
    salt = world.rng.randrange(1 << 250)
    dh = device_handle(keys.public, salt).value.value

    # Claiming the anchored root as public input: the certificate cannot
    # satisfy the in-circuit verification, so no proof exists.
    try:
        prove(world.reg_pk, world.reg_cs,
              registration_public_inputs(world.ca.root.public),
              registration_private_inputs(keys.public, cert, salt))
        return AttackOutcome("rogue-ca", "Obj3", False, "proving", "accepted")
    except UnsatisfiableInputs:
        pass

    # Proving honestly under the rogue root and submitting that: the
    # registration contract compares against the anchored key.
    proof = prove(world.reg_pk, world.reg_cs,
                  registration_public_inputs(rogue.root.public),
                  registration_private_inputs(keys.public, cert, salt))
    tx = Transaction(REGISTER_DEVICE, "rogue-worker", {
        "dh": dh,
        "rk_pub": [rogue.root.public.x.value, rogue.root.public.y.value],
    }, proof_to_bytes(proof))
    receipt = world.ledger.submit(tx)
    rejected = (not receipt.accepted
                and receipt.reason in (ROOT_KEY_MISMATCH, PROOF_INVALID))
    return AttackOutcome("rogue-ca", "Obj3", rejected, "ledger", receipt.reason,
                         receipt.constraints_checked)


def _forged_signature(world: _World) -> AttackOutcome:
    """Batch signature replaced by one from a non-device key."""
    worker, device = world.new_registered_pair()
    batch = device.emit_batch(world.batch_size)
    attacker = KeyPair.generate(world.rng)
    message = poseidon_hash([batch.commitment.root, batch.counter])
    forged = replace(batch, signature=eddsa_sign(attacker.secret, message))
    try:
        worker._prove_and_submit(device, forged)
        return AttackOutcome("forged-signature", "Obj3", False, "proving", "accepted")
    except UnsatisfiableInputs:
        return AttackOutcome("forged-signature", "Obj3", True, "proving",
                             "UnsatisfiableInputs")


def _data_tamper(world: _World) -> AttackOutcome:
    """One feature mutated after the device signed the batch."""
    worker, device = world.new_registered_pair()
    batch = device.emit_batch(world.batch_size)
    rec = batch.records[0]
    mutated = DataRecord(
        (Fixed(rec.features[0].raw + 1),) + rec.features[1:], rec.label)
    tampered = replace(batch, records=(mutated,) + batch.records[1:])
    try:
        worker._prove_and_submit(device, tampered)
        return AttackOutcome("data-tamper", "Obj3", False, "proving", "accepted")
    except UnsatisfiableInputs:
        return AttackOutcome("data-tamper", "Obj3", True, "proving",
                             "UnsatisfiableInputs")


def _counter_replay(world: _World) -> AttackOutcome:
    """Resubmission of an already accepted update transaction."""
    worker, device = world.new_registered_pair()
    batch = device.emit_batch(world.batch_size)
    gm = world.ledger.get_latest_model()
    lm = local_learn(gm, batch, DEFAULT_LEARNING_RATE)
    proof = prove(world.learn_pk, world.learn_cs,
                  learning_public_inputs(worker.handles[device], gm),
                  learning_private_inputs(batch, device.keys.public,
                                          worker.salts[device]))
    tx = Transaction(SUBMIT_UPDATE, worker.worker_id, {
        "label": learning_label(world.batch_size),
        "dh": worker.handles[device],
        "counter": batch.counter,
        "gm": gm.to_flat(),
        "lm": lm.to_flat(),
    }, proof_to_bytes(proof))
    first = world.ledger.submit(tx)
    if not first.accepted:
        raise RunInvariantError(f"replay fixture: honest update failed: {first.reason}")
    replayed = world.ledger.submit(tx)
    rejected = not replayed.accepted and replayed.reason == REPLAYED_COUNTER
    return AttackOutcome("counter-replay", "Obj1", rejected, "ledger",
                         replayed.reason, replayed.constraints_checked)


def _unregistered_handle(world: _World) -> AttackOutcome:
    """Valid learning proof for a device that never registered."""
    keys = KeyPair.generate(world.rng)
    device = Device(keys, world.ca.issue(keys.public), world.shard())
    salt = world.rng.randrange(1 << 250)
    dh = device_handle(keys.public, salt).value.value
    batch = device.emit_batch(world.batch_size)
    gm = world.ledger.get_latest_model()
    lm = local_learn(gm, batch, DEFAULT_LEARNING_RATE)
    proof = prove(world.learn_pk, world.learn_cs,
                  learning_public_inputs(dh, gm),
                  learning_private_inputs(batch, keys.public, salt))
    tx = Transaction(SUBMIT_UPDATE, "ghost-worker", {
        "label": learning_label(world.batch_size),
        "dh": dh,
        "counter": batch.counter,
        "gm": gm.to_flat(),
        "lm": lm.to_flat(),
    }, proof_to_bytes(proof))
    receipt = world.ledger.submit(tx)
    rejected = not receipt.accepted and receipt.reason == UNKNOWN_HANDLE
    return AttackOutcome("unregistered-handle", "Obj1", rejected, "ledger",
                         receipt.reason, receipt.constraints_checked)


def _poisoned_lm(world: _World) -> AttackOutcome:
    """Submitted local model differs from the proven gradient update."""
    worker, device = world.new_registered_pair()
    batch = device.emit_batch(world.batch_size)
    gm = world.ledger.get_latest_model()
    lm = local_learn(gm, batch, DEFAULT_LEARNING_RATE)
    proof = prove(world.learn_pk, world.learn_cs,
                  learning_public_inputs(worker.handles[device], gm),
                  learning_private_inputs(batch, device.keys.public,
                                          worker.salts[device]))
    poisoned = lm.to_flat()
    poisoned[0] += 1 << 16  # shift one weight by a full unit
    tx = Transaction(SUBMIT_UPDATE, worker.worker_id, {
        "label": learning_label(world.batch_size),
        "dh": worker.handles[device],
        "counter": batch.counter,
        "gm": gm.to_flat(),
        "lm": poisoned,
    }, proof_to_bytes(proof))
    receipt = world.ledger.submit(tx)
    rejected = not receipt.accepted and receipt.reason == PROOF_INVALID
    return AttackOutcome("poisoned-lm", "Obj2", rejected, "ledger",
                         receipt.reason, receipt.constraints_checked)


FIXTURES = (
    _rogue_ca,
    _forged_signature,
    _data_tamper,
    _counter_replay,
    _unregistered_handle,
    _poisoned_lm,
)


def run_attack_suite(batch_size: int = 10, seed: int = 1337) -> dict:
    """Execute the control plus all six fixtures; returns the coverage matrix."""
    world = _World(batch_size, seed)
    control = _control(world)
    outcomes = [fixture(world) for fixture in FIXTURES]
    objectives = {}
    for outcome in outcomes:
        objectives.setdefault(outcome.objective, []).append(outcome.rejected)
    return {
        "control_accepted": not control.rejected,
        "fixtures": outcomes,
        "objectives": {obj: all(flags) for obj, flags in sorted(objectives.items())},
        "all_rejected": all(o.rejected for o in outcomes),
    }

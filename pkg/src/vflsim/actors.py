"""Protocol roles: certificate authority, certified device, worker.

The device-worker channel is an in-process call returning the signed batch;
the trust boundary is preserved (the worker cannot forge device signatures)
even though the wire is gone. Worker salts come from a seeded RNG owned by
the worker, so whole runs replay deterministically.

Transactions built here carry only (proof, DH, GM, LM, counter, RK_pub)
shaped payloads; raw records, device public keys, and salts never leave the
worker. The tests assert that boundary on the payload schemas.
"""

from __future__ import annotations

from .circuits import (
    REGISTRATION_LABEL,
    learning_label,
    learning_private_inputs,
    learning_public_inputs,
    registration_private_inputs,
    registration_public_inputs,
)
from .commitments import batch_commitment, device_handle
from .curve import CurvePoint, KeyPair
from .eddsa import Signature, eddsa_sign
from .errors import OffCurveInput, SourceExhausted
from .fixedpoint import DEFAULT_LEARNING_RATE, Fixed, LearningBatch, local_learn
from .ledger import (
    REGISTER_DEVICE,
    STALE_GLOBAL_MODEL,
    SUBMIT_UPDATE,
    Ledger,
    Receipt,
    Transaction,
)
from .poseidon import poseidon_hash
from .proofs import prove, proof_to_bytes


class CertificateAuthority:
    """Holds the PKI root key pair and issues device certificates."""

    def __init__(self, root: KeyPair):
        self.root = root
        self.issued = []

    def issue(self, dk_pub: CurvePoint) -> Signature:
        """DC = Sign(root secret, H(DK_pub.x, DK_pub.y))."""
        if not dk_pub.is_on_curve():
            raise OffCurveInput("device key off curve")
        certificate = eddsa_sign(self.root.secret,
                                 poseidon_hash([dk_pub.x, dk_pub.y]))
        self.issued.append(dk_pub)
        return certificate


class Device:
    """Certified sensor device: signs committed batches with a monotone counter."""

    def __init__(self, keys: KeyPair, certificate: Signature, records):
        self.keys = keys
        self.certificate = certificate
        self._records = list(records)
        self._pos = 0
        self._next_counter = 1

    @property
    def remaining(self) -> int:
        return len(self._records) - self._pos

    def emit_batch(self, n: int) -> LearningBatch:
        if n < 1:
            raise ValueError("batch size must be >= 1")
        if self.remaining < n:
            raise SourceExhausted(
                f"device has {self.remaining} records left, {n} requested")
        records = tuple(self._records[self._pos:self._pos + n])
        self._pos += n
        counter = self._next_counter
        self._next_counter += 1
        commitment = batch_commitment(records)
        message = poseidon_hash([commitment.root, counter])
        signature = eddsa_sign(self.keys.secret, message)
        return LearningBatch(records, counter, commitment, signature)


class Worker:
    """Distrusted node that registers devices, trains locally, and proves it."""

    def __init__(self, worker_id: str, ledger: Ledger, rng, proving_artifacts,
                 learning_rate: Fixed = DEFAULT_LEARNING_RATE):
        """``proving_artifacts`` maps circuit label -> (ProvingKey, ConstraintSystem).

        ``learning_rate`` must match the constant baked into the learning
        circuits, otherwise every update is rejected as ProofInvalid.
        """
        self.worker_id = worker_id
        self.ledger = ledger
        self.rng = rng
        self.proving_artifacts = proving_artifacts
        self.learning_rate = learning_rate
        self.salts = {}  # device -> salt (never serialized into transactions)
        self.handles = {}  # device -> dh int

    def register(self, device: Device, rk_pub: CurvePoint) -> Receipt:
        pk, cs = self.proving_artifacts[REGISTRATION_LABEL]
        salt = self.rng.randrange(1 << 250)
        dh = device_handle(device.keys.public, salt).value.value
        proof = prove(pk, cs,
                      registration_public_inputs(rk_pub),
                      registration_private_inputs(device.keys.public,
                                                  device.certificate, salt))
        tx = Transaction(REGISTER_DEVICE, self.worker_id,
                         {"dh": dh, "rk_pub": [rk_pub.x.value, rk_pub.y.value]},
                         proof_to_bytes(proof))
        receipt = self.ledger.submit(tx)
        if receipt.accepted:
            self.salts[device] = salt
            self.handles[device] = dh
        return receipt

    def _prove_and_submit(self, device: Device, batch: LearningBatch) -> Receipt:
        label = learning_label(len(batch.records))
        pk, cs = self.proving_artifacts[label]
        dh = self.handles[device]
        salt = self.salts[device]
        gm = self.ledger.get_latest_model()
        lm = local_learn(gm, batch, self.learning_rate)
        proof = prove(pk, cs,
                      learning_public_inputs(dh, gm),
                      learning_private_inputs(batch, device.keys.public, salt))
        tx = Transaction(SUBMIT_UPDATE, self.worker_id, {
            "label": label,
            "dh": dh,
            "counter": batch.counter,
            "gm": gm.to_flat(),
            "lm": lm.to_flat(),
        }, proof_to_bytes(proof))
        return self.ledger.submit(tx)

    def learning_round(self, device: Device, batch_size: int) -> Receipt:
        """Fetch GM, obtain a signed batch, prove, submit; retry once on a
        cycle-boundary race (StaleGlobalModel) with the refreshed model."""
        if device not in self.handles:
            raise KeyError("device is not registered by this worker")
        batch = device.emit_batch(batch_size)
        receipt = self._prove_and_submit(device, batch)
        if not receipt.accepted and receipt.reason == STALE_GLOBAL_MODEL:
            receipt = self._prove_and_submit(device, batch)
        return receipt

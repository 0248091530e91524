"""Deterministic simulated blockchain hosting the three contracts.

The registration contract anchors the CA root key and keeps the append-only
handle registry; the verifier contract holds verification keys and re-runs
constraint satisfaction (its cost proxy is constraints checked); the
aggregation contract folds accepted local models into a pending sum and
flips the latest model at block-driven cycle boundaries.

Transaction application is a pure function ``apply_transaction(state, tx) ->
(state, receipt)``; rejected transactions return the original state object
untouched. The ledger wrapper serializes submissions, optionally streaming
every transaction to a length-prefixed binary log that replays to a
bit-identical state digest.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

from .errors import SerializationError
from .fields import FIELD_PRIME as _P
from .fixedpoint import ModelParams
from .poseidon import compress, poseidon_hash
from .proofs import VerificationKey, proof_from_bytes, verify, vk_from_bytes

# Transaction kinds
GENESIS = "Genesis"
ANCHOR_ROOT_KEY = "AnchorRootKey"
REGISTER_VK = "RegisterVk"
REGISTER_DEVICE = "RegisterDevice"
SUBMIT_UPDATE = "SubmitUpdate"
ADVANCE_BLOCK = "AdvanceBlock"

# Receipt reason codes
OK = "Ok"
BAD_TRANSACTION = "BadTransaction"
ALREADY_ANCHORED = "AlreadyAnchored"
NO_ROOT_ANCHORED = "NoRootAnchored"
VK_EXISTS = "VkExists"
NO_VK = "NoVk"
PROOF_INVALID = "ProofInvalid"
ROOT_KEY_MISMATCH = "RootKeyMismatch"
DUPLICATE_HANDLE = "DuplicateHandle"
UNKNOWN_HANDLE = "UnknownHandle"
STALE_GLOBAL_MODEL = "StaleGlobalModel"
REPLAYED_COUNTER = "ReplayedCounter"

_LOG_MAGIC = b"VFLLOG1\n"


@dataclass(frozen=True)
class HandleEntry:
    registered_at: int
    last_counter: int


@dataclass(frozen=True)
class CycleReport:
    cycle_index: int
    updates_aggregated: int
    model_version: int
    model_digest: int


@dataclass(frozen=True)
class Receipt:
    accepted: bool
    reason: str
    constraints_checked: int = 0
    cycle_report: CycleReport | None = None


@dataclass(frozen=True)
class Transaction:
    """Ordered ledger input; payload is JSON-able, blob carries proof/vk bytes."""

    kind: str
    sender: str
    payload: dict
    blob: bytes = b""

    def to_bytes(self) -> bytes:
        doc = {"kind": self.kind, "sender": self.sender, "payload": self.payload}
        body = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return struct.pack(">II", len(body), len(self.blob)) + body + self.blob

    @classmethod
    def from_bytes(cls, data: bytes) -> "Transaction":
        try:
            body_len, blob_len = struct.unpack(">II", data[:8])
            body = json.loads(data[8:8 + body_len].decode("utf-8"))
            blob = data[8 + body_len:8 + body_len + blob_len]
            if 8 + body_len + blob_len != len(data):
                raise SerializationError("trailing transaction bytes")
            return cls(body["kind"], body["sender"], body["payload"], blob)
        except (struct.error, KeyError, ValueError) as exc:
            raise SerializationError(str(exc)) from exc


@dataclass(frozen=True)
class LedgerState:
    block_height: int = 0
    cycle_length_blocks: int = 10
    cycle_index: int = 0
    anchored_root_key: tuple | None = None
    handles: dict = field(default_factory=dict)  # dh -> HandleEntry
    vks: dict = field(default_factory=dict)  # label -> VerificationKey
    latest: ModelParams | None = None
    pending_sum: tuple = ()
    pending_count: int = 0


def model_digest(model: ModelParams) -> int:
    return poseidon_hash([model.version] + model.to_field_list()).value


def canonical_state_bytes(state: LedgerState) -> bytes:
    doc = {
        "block_height": state.block_height,
        "cycle_length_blocks": state.cycle_length_blocks,
        "cycle_index": state.cycle_index,
        "root_key": list(state.anchored_root_key) if state.anchored_root_key else None,
        "handles": sorted(
            (dh, e.registered_at, e.last_counter) for dh, e in state.handles.items()
        ),
        "vks": sorted((label, vk.digest.hex()) for label, vk in state.vks.items()),
        "latest": state.latest.to_flat() if state.latest else None,
        "pending_sum": list(state.pending_sum),
        "pending_count": state.pending_count,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def state_digest(state: LedgerState) -> int:
    """Poseidon chain over 31-byte chunks of the canonical serialization."""
    data = canonical_state_bytes(state)
    digest = compress(len(data), 0)
    for i in range(0, len(data), 31):
        digest = compress(digest, int.from_bytes(data[i:i + 31], "big"))
    return digest


def _reject(reason: str, constraints_checked: int = 0) -> Receipt:
    return Receipt(False, reason, constraints_checked)


def _apply_genesis(state, tx):
    if state.block_height != 0 or state.latest is not None:
        return state, _reject(BAD_TRANSACTION)
    try:
        cycle_len = int(tx.payload["cycle_length_blocks"])
        model = ModelParams.from_flat(tx.payload["model"])
    except Exception:
        return state, _reject(BAD_TRANSACTION)
    if cycle_len < 1:
        return state, _reject(BAD_TRANSACTION)
    new = replace(state, cycle_length_blocks=cycle_len, latest=model,
                  pending_sum=tuple([0] * 60))
    return new, Receipt(True, OK)


def _apply_anchor(state, tx):
    if state.anchored_root_key is not None:
        return state, _reject(ALREADY_ANCHORED)
    try:
        x, y = (int(v) for v in tx.payload["rk_pub"])
    except Exception:
        return state, _reject(BAD_TRANSACTION)
    return replace(state, anchored_root_key=(x, y)), Receipt(True, OK)


def _apply_register_vk(state, tx):
    label = tx.payload.get("label")
    if not isinstance(label, str):
        return state, _reject(BAD_TRANSACTION)
    if label in state.vks:
        return state, _reject(VK_EXISTS)
    try:
        vk = vk_from_bytes(tx.blob)
    except SerializationError:
        return state, _reject(BAD_TRANSACTION)
    if vk.label != label:
        return state, _reject(BAD_TRANSACTION)
    vks = dict(state.vks)
    vks[label] = vk
    return replace(state, vks=vks), Receipt(True, OK)


def _apply_register_device(state, tx):
    if state.anchored_root_key is None:
        return state, _reject(NO_ROOT_ANCHORED)
    vk = state.vks.get("registration")
    if vk is None:
        return state, _reject(NO_VK)
    try:
        dh = int(tx.payload["dh"])
        rk = tuple(int(v) for v in tx.payload["rk_pub"])
        proof = proof_from_bytes(tx.blob)
    except Exception:
        return state, _reject(BAD_TRANSACTION)
    checked = vk.constraint_count
    if not verify(vk, proof, list(rk)) or tuple(proof.public_outputs) != (dh % _P,):
        return state, _reject(PROOF_INVALID, checked)
    if rk != state.anchored_root_key:
        return state, _reject(ROOT_KEY_MISMATCH, checked)
    if dh in state.handles:
        return state, _reject(DUPLICATE_HANDLE, checked)
    handles = dict(state.handles)
    handles[dh] = HandleEntry(state.block_height, 0)
    return replace(state, handles=handles), Receipt(True, OK, checked)


def _apply_submit_update(state, tx):
    label = tx.payload.get("label")
    vk = state.vks.get(label) if isinstance(label, str) else None
    if vk is None:
        return state, _reject(NO_VK)
    try:
        dh = int(tx.payload["dh"])
        counter = int(tx.payload["counter"])
        gm = ModelParams.from_flat(tx.payload["gm"])
        lm = ModelParams.from_flat(tx.payload["lm"])
        proof = proof_from_bytes(tx.blob)
    except Exception:
        return state, _reject(BAD_TRANSACTION)
    checked = vk.constraint_count
    publics = [dh % _P] + gm.to_field_list()
    expected_outputs = tuple([counter % _P] + lm.to_field_list())
    if not verify(vk, proof, publics) or tuple(proof.public_outputs) != expected_outputs:
        return state, _reject(PROOF_INVALID, checked)
    entry = state.handles.get(dh)
    if entry is None:
        return state, _reject(UNKNOWN_HANDLE, checked)
    if gm != state.latest:
        return state, _reject(STALE_GLOBAL_MODEL, checked)
    if counter != entry.last_counter + 1:
        return state, _reject(REPLAYED_COUNTER, checked)
    handles = dict(state.handles)
    handles[dh] = HandleEntry(entry.registered_at, counter)
    pending = list(state.pending_sum)
    for i, raw in enumerate(lm.flat_raws()):
        pending[i] += raw
    new = replace(state, handles=handles, pending_sum=tuple(pending),
                  pending_count=state.pending_count + 1)
    return new, Receipt(True, OK, checked)


def _apply_advance_block(state, tx):
    height = state.block_height + 1
    if height % state.cycle_length_blocks != 0:
        return replace(state, block_height=height), Receipt(True, OK)
    cycle_index = state.cycle_index + 1
    if state.pending_count == 0:
        new = replace(state, block_height=height, cycle_index=cycle_index)
        report = CycleReport(cycle_index, 0, new.latest.version,
                             model_digest(new.latest))
        return new, Receipt(True, OK, cycle_report=report)
    count = state.pending_count
    avg = [s // count for s in state.pending_sum]
    latest = ModelParams.from_raws(
        [avg[i * 9:(i + 1) * 9] for i in range(6)],
        avg[54:60],
        state.latest.version + 1,
    )
    new = replace(state, block_height=height, cycle_index=cycle_index,
                  latest=latest, pending_sum=tuple([0] * 60), pending_count=0)
    report = CycleReport(cycle_index, count, latest.version, model_digest(latest))
    return new, Receipt(True, OK, cycle_report=report)


_HANDLERS = {
    GENESIS: _apply_genesis,
    ANCHOR_ROOT_KEY: _apply_anchor,
    REGISTER_VK: _apply_register_vk,
    REGISTER_DEVICE: _apply_register_device,
    SUBMIT_UPDATE: _apply_submit_update,
    ADVANCE_BLOCK: _apply_advance_block,
}


def apply_transaction(state: LedgerState, tx: Transaction):
    """Pure state transition; rejected transactions leave state untouched."""
    handler = _HANDLERS.get(tx.kind)
    if handler is None:
        return state, _reject(BAD_TRANSACTION)
    if tx.kind != GENESIS and state.latest is None:
        return state, _reject(BAD_TRANSACTION)
    return handler(state, tx)


class Ledger:
    """Ordered inbox around the state machine, with optional persisted log."""

    def __init__(self, log_path=None):
        self.state = LedgerState()
        self._log = open(log_path, "wb") if log_path else None
        if self._log:
            self._log.write(_LOG_MAGIC)

    @classmethod
    def create(cls, genesis_model: ModelParams | None = None,
               cycle_length_blocks: int = 10, log_path=None) -> "Ledger":
        ledger = cls(log_path)
        model = genesis_model or ModelParams.zero()
        tx = Transaction(GENESIS, "task-initiator", {
            "cycle_length_blocks": cycle_length_blocks,
            "model": model.to_flat(),
        })
        receipt = ledger.submit(tx)
        if not receipt.accepted:
            raise ValueError(f"genesis rejected: {receipt.reason}")
        return ledger

    def submit(self, tx: Transaction) -> Receipt:
        self.state, receipt = apply_transaction(self.state, tx)
        if self._log:
            record = tx.to_bytes()
            self._log.write(struct.pack(">I", len(record)))
            self._log.write(record)
        return receipt

    def advance_block(self) -> CycleReport | None:
        receipt = self.submit(Transaction(ADVANCE_BLOCK, "task-initiator", {}))
        return receipt.cycle_report

    def anchor_root_key(self, rk_pub, sender="task-initiator") -> Receipt:
        return self.submit(Transaction(ANCHOR_ROOT_KEY, sender, {
            "rk_pub": [rk_pub.x.value, rk_pub.y.value],
        }))

    def register_vk(self, vk: VerificationKey, sender="task-initiator") -> Receipt:
        from .proofs import vk_to_bytes
        return self.submit(Transaction(REGISTER_VK, sender, {"label": vk.label},
                                       vk_to_bytes(vk)))

    # read endpoints (the workers' blockchain client)

    def get_latest_model(self) -> ModelParams:
        return self.state.latest

    def get_handle(self, dh) -> HandleEntry | None:
        return self.state.handles.get(int(dh))

    def get_block_height(self) -> int:
        return self.state.block_height

    def state_digest(self) -> int:
        return state_digest(self.state)

    def close(self):
        if self._log:
            self._log.close()
            self._log = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def iter_log(path):
    """Yield transactions from a persisted log file."""
    with open(path, "rb") as fh:
        if fh.read(8) != _LOG_MAGIC:
            raise SerializationError("bad log magic")
        while True:
            header = fh.read(4)
            if not header:
                return
            (length,) = struct.unpack(">I", header)
            record = fh.read(length)
            if len(record) != length:
                raise SerializationError("truncated log record")
            yield Transaction.from_bytes(record)


def replay_log(path) -> Ledger:
    """Re-apply a persisted log from genesis; returns the resulting ledger."""
    ledger = Ledger()
    for tx in iter_log(path):
        ledger.submit(tx)
    return ledger

"""Verifiable decentralized federated learning, simulated end to end.

Certified devices sign Merkle-committed learning batches, workers prove
registration and local training inside rank-1 constraint systems, and a
deterministic simulated ledger verifies the proofs and aggregates accepted
models. See README.md for the workflow walkthrough and the CLI.
"""

from .commitments import (
    DataRecord,
    DeviceHandle,
    MerkleCommitment,
    batch_commitment,
    device_handle,
    leaf_hash,
    merkle_root,
)
from .curve import BASE_POINT, SUBGROUP_ORDER, CurvePoint, KeyPair, curve_add, scalar_mul
from .eddsa import Signature, eddsa_sign, eddsa_verify
from .errors import VflError
from .fields import FIELD_PRIME, FieldElement
from .fixedpoint import (
    Fixed,
    LearningBatch,
    ModelParams,
    decode_fixed,
    encode_fixed,
    fixed_mul,
    forward,
    local_learn,
    mse_loss,
    predict,
)
from .poseidon import PoseidonParams, poseidon_hash
from .r1cs import (
    ConstraintSystem,
    Witness,
    check_satisfaction,
    synthesize_witness,
)
from .circuits import build_learning_circuit, build_registration_circuit
from .proofs import Proof, ProvingKey, VerificationKey, prove, setup, verify
from .ledger import Ledger, LedgerState, Receipt, Transaction, replay_log
from .actors import CertificateAuthority, Device, Worker
from .experiment import ExperimentConfig, MetricsReport, run_experiment
from .attacks import run_attack_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

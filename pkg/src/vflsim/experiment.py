"""Experiment orchestration: the paper-style evaluation loop at desk scale.

A run builds the circuits, runs setup, deploys a fresh ledger, registers
every device through the registration workflow, then executes learning
cycles: each worker proves one update per device per cycle, blocks advance
to the cycle boundary, the aggregated model is scored against the held-out
split. Everything is driven by one seed; metrics are JSON-lines with one
record per cycle plus a summary, and wall-clock fields are the only
nondeterministic ones (all prefixed ``wall_`` so reports diff cleanly).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
import random

import numpy as np

from .actors import CertificateAuthority, Device, Worker
from .circuits import (
    REGISTRATION_LABEL,
    build_learning_circuit,
    build_registration_circuit,
    learning_label,
)
from .curve import KeyPair
from .dataset import ingest_dataset, synthetic_blobs
from .errors import ConfigError, RunInvariantError
from .fixedpoint import ModelParams, encode_fixed
from .ledger import Ledger
from .proofs import setup

DATASETS = ("synthetic", "uci_condensed")


@dataclass
class ExperimentConfig:
    workers: int = 1
    devices_per_worker: int = 1
    batch_size: int = 10
    cycles: int = 300
    cycle_length_blocks: int = 10
    learning_rate: float = 0.01
    rng_seed: int = 42
    dataset: str = "synthetic"
    dataset_path: str | None = None
    output_dir: str | None = None
    persist_transactions: bool = True
    synthetic_records: int = 0  # 0 = auto-size to cover the whole run
    render_figures: bool = True

    def validate(self):
        for name in ("workers", "devices_per_worker", "batch_size",
                     "cycle_length_blocks"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.cycles < 0:
            raise ConfigError("cycles must be >= 0")
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}")
        if self.dataset == "uci_condensed" and not self.dataset_path:
            raise ConfigError("dataset_path is required for uci_condensed")
        if not 0 < self.learning_rate < (1 << 15):
            raise ConfigError("learning_rate out of range")
        return self

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            cfg = cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg.validate()

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(doc)


@dataclass
class MetricsReport:
    """Per-cycle records plus one summary record (the JSONL layout)."""

    cycles: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def accuracy_series(self):
        return [rec["accuracy"] for rec in self.cycles]

    def final_accuracy(self):
        return self.cycles[-1]["accuracy"] if self.cycles else None


class EvalSet:
    """Vectorized accuracy evaluation, bit-equal to the per-record forward."""

    def __init__(self, records):
        self.x = np.array([[f.raw for f in r.features] for r in records],
                          dtype=np.int64)
        self.y = np.array([r.label for r in records], dtype=np.int64)

    def accuracy(self, model: ModelParams) -> float:
        if len(self.y) == 0:
            return 0.0
        w = np.array([[v.raw for v in row] for row in model.weights], dtype=np.int64)
        b = np.array([v.raw for v in model.biases], dtype=np.int64)
        scores = np.empty((len(self.y), 6), dtype=np.int64)
        for i in range(6):
            scores[:, i] = ((self.x * w[i]) >> 16).sum(axis=1) + b[i]
        pred = np.argmax(scores, axis=1)
        return float((pred == self.y).mean())


def _load_data(cfg: ExperimentConfig):
    n_dev = cfg.workers * cfg.devices_per_worker
    if cfg.dataset == "synthetic":
        need_train = n_dev * cfg.cycles * cfg.batch_size
        n_records = cfg.synthetic_records or max(int(need_train / 0.8) + 512, 2048)
        train, test = synthetic_blobs(n_records, cfg.rng_seed)
    else:
        train, test = ingest_dataset(cfg.dataset_path, cfg.rng_seed)
    shards = [train[k::n_dev] for k in range(n_dev)]
    per_device_need = cfg.cycles * cfg.batch_size
    if any(len(s) < per_device_need for s in shards):
        raise ConfigError(
            f"dataset too small: each of {n_dev} devices needs "
            f"{per_device_need} training records")
    return shards, test


def run_experiment(cfg: ExperimentConfig) -> MetricsReport:
    cfg.validate()
    rng = random.Random(cfg.rng_seed)
    shards, test = _load_data(cfg)
    evaluator = EvalSet(test)
    lr = encode_fixed(cfg.learning_rate)

    t0 = time.perf_counter()
    reg_cs = build_registration_circuit()
    learn_cs = build_learning_circuit(cfg.batch_size, lr)
    wall_build = time.perf_counter() - t0

    t0 = time.perf_counter()
    reg_pk, reg_vk = setup(reg_cs)
    learn_pk, learn_vk = setup(learn_cs)
    wall_setup = time.perf_counter() - t0

    out_dir = cfg.output_dir
    log_path = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        if cfg.persist_transactions:
            log_path = os.path.join(out_dir, "transactions.log")

    ledger = Ledger.create(ModelParams.zero(), cfg.cycle_length_blocks, log_path)
    ca = CertificateAuthority(KeyPair.generate(rng))
    for receipt in (ledger.anchor_root_key(ca.root.public),
                    ledger.register_vk(reg_vk),
                    ledger.register_vk(learn_vk)):
        if not receipt.accepted:
            raise RunInvariantError(f"initialization rejected: {receipt.reason}")

    artifacts = {REGISTRATION_LABEL: (reg_pk, reg_cs),
                 learning_label(cfg.batch_size): (learn_pk, learn_cs)}
    workers = []
    shard_iter = iter(shards)
    for w in range(cfg.workers):
        worker = Worker(f"worker-{w}", ledger, rng, artifacts, lr)
        devices = []
        for _ in range(cfg.devices_per_worker):
            keys = KeyPair.generate(rng)
            device = Device(keys, ca.issue(keys.public), next(shard_iter))
            receipt = worker.register(device, ca.root.public)
            if not receipt.accepted:
                raise RunInvariantError(f"registration rejected: {receipt.reason}")
            devices.append(device)
        workers.append((worker, devices))

    report = MetricsReport()
    accept_tally = 0
    reject_tally = {}
    for cycle in range(cfg.cycles):
        t_cycle = time.perf_counter()
        accepted = 0
        for worker, devices in workers:
            for device in devices:
                receipt = worker.learning_round(device, cfg.batch_size)
                if not receipt.accepted:
                    raise RunInvariantError(
                        f"honest update rejected in cycle {cycle}: {receipt.reason}")
                accepted += 1
        cycle_report = None
        for _ in range(cfg.cycle_length_blocks):
            out = ledger.advance_block()
            cycle_report = out or cycle_report
        accuracy = evaluator.accuracy(ledger.get_latest_model())
        accept_tally += accepted
        report.cycles.append({
            "type": "cycle",
            "cycle": cycle,
            "accuracy": accuracy,
            "accepted": accepted,
            "rejected": {},
            "model_version": ledger.get_latest_model().version,
            "aggregated": cycle_report.updates_aggregated if cycle_report else 0,
            "wall_cycle_s": time.perf_counter() - t_cycle,
        })

    report.summary = {
        "type": "summary",
        "config": asdict(cfg),
        "constraints": {REGISTRATION_LABEL: reg_cs.n_constraints,
                        learn_cs.label: learn_cs.n_constraints},
        "cycles_run": cfg.cycles,
        "accept_tally": accept_tally,
        "reject_tally": reject_tally,
        "final_accuracy": report.final_accuracy(),
        "final_model_version": ledger.get_latest_model().version,
        "final_state_digest": str(ledger.state_digest()),
        "wall_build_s": wall_build,
        "wall_setup_s": wall_setup,
    }
    ledger.close()

    if out_dir:
        from . import reporting
        reporting.write_metrics_jsonl(os.path.join(out_dir, "metrics.jsonl"),
                                      report.cycles, report.summary)
        reporting.write_accuracy_csv(os.path.join(out_dir, "accuracy.csv"),
                                     report.accuracy_series)
        reporting.write_model_checkpoint(os.path.join(out_dir, "model.json"),
                                         ledger.get_latest_model())
        if cfg.render_figures:
            label = f"batch {cfg.batch_size} ({cfg.dataset})"
            reporting.render_accuracy_figure(
                os.path.join(out_dir, "accuracy.png"),
                {label: report.accuracy_series})
            reporting.render_receipt_figure(
                os.path.join(out_dir, "receipts.png"),
                accept_tally, reject_tally)
    return report

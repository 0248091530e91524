"""Report writers: JSON-lines metrics, delimited series, and figures.

Figures render through the Agg backend so runs work headless; the delimited
accuracy series and the JSONL metrics are the canonical outputs, figures are
the plot-ready view of the same data.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def write_metrics_jsonl(path, cycle_records, summary):
    with open(path, "w") as fh:
        for record in cycle_records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        fh.write(json.dumps(summary, sort_keys=True) + "\n")


def read_metrics_jsonl(path):
    cycles, summary = [], None
    with open(path) as fh:
        for line in fh:
            record = json.loads(line)
            if record.get("type") == "summary":
                summary = record
            else:
                cycles.append(record)
    return cycles, summary


def write_accuracy_csv(path, series):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cycle", "accuracy"])
        for cycle, accuracy in enumerate(series):
            writer.writerow([cycle, f"{accuracy:.6f}"])


def write_model_checkpoint(path, model):
    """Flat layout: 54 weights row-major, 6 biases, version (raw units)."""
    with open(path, "w") as fh:
        json.dump(model.to_flat(), fh)


def render_accuracy_figure(path, series_by_label):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, series in series_by_label.items():
        ax.plot(range(len(series)), series, lw=1.4, label=label)
    ax.set_xlabel("learning cycle")
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, lw=0.3, alpha=0.5)
    if series_by_label:
        ax.legend(loc="lower right", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_receipt_figure(path, accepted: int, reject_tally: dict):
    labels = ["accepted"] + sorted(reject_tally)
    counts = [accepted] + [reject_tally[k] for k in sorted(reject_tally)]
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    bars = ax.bar(labels, counts, color=["#2a9d8f"] + ["#e76f51"] * len(reject_tally))
    ax.bar_label(bars, fontsize=9)
    ax.set_ylabel("transactions")
    ax.tick_params(axis="x", labelrotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

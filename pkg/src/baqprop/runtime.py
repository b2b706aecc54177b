"""Deterministic seeding and trace/summary persistence.

One master seed expands into named substreams so that, e.g., enabling shot
sampling cannot perturb the initialization draws.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

__all__ = ["substream", "write_trace_jsonl", "read_trace_jsonl",
           "write_summary", "default_out_dir"]

OUT_ENV_VAR = "BAQPROP_OUT"


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Named RNG stream derived from the master seed."""
    digest = hashlib.sha256(name.encode()).digest()
    key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(key,)))


def default_out_dir() -> str:
    return os.environ.get(OUT_ENV_VAR, "runs")


TRACE_KEYS = ("iter", "eta", "gamma", "sigma", "grad", "phi0", "pi0", "metric")


def write_trace_jsonl(path, records) -> None:
    """One JSON object per iteration, canonical key order."""
    with open(path, "w") as fh:
        for rec in records:
            row = {k: rec.get(k) for k in TRACE_KEYS}
            for extra in ("overflow", "clamped"):
                if extra in rec:
                    row[extra] = rec[extra]
            fh.write(json.dumps(row) + "\n")


def read_trace_jsonl(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def summarize_sweep(per_seed: dict) -> dict:
    """Cross-seed statistics of the final metric: mean/min/max per seed list."""
    finals = {s: v for s, v in per_seed.items()}
    vals = np.array(list(finals.values()), dtype=float)
    return {
        "per_seed": {str(k): float(v) for k, v in finals.items()},
        "mean": float(vals.mean()),
        "min": float(vals.min()),
        "max": float(vals.max()),
    }

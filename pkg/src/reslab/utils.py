"""Shared helpers: error types, hashing, deterministic formatting, threading."""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

__all__ = ["NumericError", "map_hash", "fmt_float", "eigen_sort_key", "max_threads"]


class NumericError(RuntimeError):
    """A numerical procedure failed to meet its contract (exit code 3 in the CLI)."""


def map_hash(spec: dict) -> str:
    """Stable short hash of a map-spec document (canonical JSON, sha256)."""
    blob = json.dumps(spec, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def fmt_float(v: float) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(v))


def eigen_sort_key(z: complex):
    """Sort key: modulus descending, then |arg| ascending, conjugates adjacent
    with the negative-imaginary member first (arg ascending within a pair)."""
    z = complex(z)
    return (-abs(z), abs(np.angle(z)), np.sign(z.imag))


def max_threads() -> int:
    """Worker cap for embarrassingly parallel grids; RESLAB_THREADS overrides."""
    raw = os.environ.get("RESLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)

"""Probability-vector primitives used by every other module."""

import math
from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError

# Input vectors are checked loosely; identities between computed values tightly.
INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12


def validate_prob(p: Sequence[float]) -> np.ndarray:
    """Check a raw sequence and return it as a read-only float64 vector.

    Raises ValidationError naming the first negative index, an entry above one,
    or the offending sum.
    """
    arr = np.array(p, dtype=float).ravel()
    if arr.size == 0:
        raise ValidationError("probability vector is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValidationError(f"entry {bad} is not finite ({arr[bad]!r})")
    negative = np.flatnonzero(arr < 0)
    if negative.size:
        i = int(negative[0])
        raise ValidationError(f"entry {i} is negative ({arr[i]!r})")
    too_big = np.flatnonzero(arr > 1 + INPUT_TOL)
    if too_big.size:
        i = int(too_big[0])
        raise ValidationError(f"entry {i} exceeds 1 ({arr[i]!r})")
    total = math.fsum(arr)
    if abs(total - 1.0) > INPUT_TOL:
        raise ValidationError(f"entries sum to {total!r}, expected 1")
    arr.setflags(write=False)
    return arr


def as_vector(p: Sequence[float]) -> np.ndarray:
    """Float view of an already trusted vector (no normalization check)."""
    return np.asarray(p, dtype=float).ravel()


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    p, q = as_vector(p), as_vector(q)
    if p.shape != q.shape:
        raise DimensionError(f"length mismatch: {p.size} vs {q.size}")
    return 0.5 * math.fsum(np.abs(p - q))

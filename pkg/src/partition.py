"""Thermal pointer weights and the greedy assignment of pointer eigenvectors
to outcome subspaces."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from .core import as_vector
from .errors import DimensionError, DomainError, OutputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointerSpec:
    energies: Tuple[float, ...]
    beta: float
    subspace_dims: Tuple[int, ...]

    def __post_init__(self):
        if not self.energies:
            raise DomainError("pointer needs at least one energy level")
        if any(d < 1 for d in self.subspace_dims):
            raise DimensionError(f"subspace dims must be positive: {self.subspace_dims}")
        if sum(self.subspace_dims) > len(self.energies):
            raise DimensionError(
                f"subspace dims sum to {sum(self.subspace_dims)} "
                f"but the pointer has {len(self.energies)} levels"
            )

    @property
    def dimension(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class Partition:
    """Chosen D_x index sets and their traces a_x.

    Indices inside each D_x are listed by descending weight; that order defines
    the basis pairing used by the dense broadcast unitary.
    """

    assignment: Dict[int, Tuple[int, ...]]
    avector: Tuple[float, ...]
    weights: Tuple[float, ...] = field(default=(), repr=False)
    residual: float = 0.0

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(self.assignment[x]) for x in range(len(self.avector)))

    def labels(self) -> np.ndarray:
        """Outcome label per pointer level, -1 for levels outside every D_x."""
        out = np.full(len(self.weights), -1, dtype=int)
        for x, idx in self.assignment.items():
            out[list(idx)] = x
        return out


def boltzmann_weights(energies: Sequence[float], beta: float) -> np.ndarray:
    energies = as_vector(energies)
    if energies.size == 0:
        raise DomainError("energy list is empty")
    if not math.isfinite(beta) or beta < 0:
        raise DomainError(f"inverse temperature must be finite and >= 0, got {beta!r}")
    return softmax(-beta * (energies - energies.min()))


def greedy_partition(
    weights: Sequence[float],
    subspace_dims: Sequence[int],
    renormalize: bool = False,
) -> Partition:
    """Fill the largest subspaces with the largest weights.

    Weights are taken in descending order (ties by ascending index); subspaces
    are filled in descending dimension (ties by outcome index). Leftover weight
    when the dims do not cover the pointer is returned as ``residual``.
    """
    weights = as_vector(weights)
    dims = [int(d) for d in subspace_dims]
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"subspace dims must be positive: {dims}")
    if sum(dims) > weights.size:
        raise DimensionError(
            f"subspace dims sum to {sum(dims)} but only {weights.size} weights given"
        )

    order = np.lexsort((np.arange(weights.size), -weights))
    fill_order = sorted(range(len(dims)), key=lambda x: (-dims[x], x))

    assignment: Dict[int, Tuple[int, ...]] = {}
    cursor = 0
    for x in fill_order:
        assignment[x] = tuple(int(i) for i in order[cursor : cursor + dims[x]])
        cursor += dims[x]

    traces = [math.fsum(weights[list(assignment[x])]) for x in range(len(dims))]
    residual = math.fsum(weights[order[cursor:]])
    if residual > 0:
        logger.debug("%d levels outside every subspace carry weight %r",
                     weights.size - cursor, residual)
    if renormalize:
        total = math.fsum(traces)
        if total <= 0:
            raise DomainError("assigned subspaces carry zero weight; cannot renormalize")
        traces = [t / total for t in traces]

    return Partition(
        assignment=assignment,
        avector=tuple(traces),
        weights=tuple(float(w) for w in weights),
        residual=residual,
    )


def pointer_partition(spec: PointerSpec, renormalize: bool = False) -> Partition:
    weights = boltzmann_weights(spec.energies, spec.beta)
    return greedy_partition(weights, spec.subspace_dims, renormalize=renormalize)


def read_energies(path: Path) -> np.ndarray:
    """One real per line; blank lines and '#' comments ignored."""
    try:
        energies = np.loadtxt(path, dtype=float, ndmin=1, comments="#")
    except OSError as e:
        raise OutputError(f"cannot read energies from {path}: {e}") from e
    except ValueError as e:
        raise DomainError(f"{path}: not a one-column list of reals ({e})") from e
    if energies.ndim != 1:
        raise DomainError(f"{path}: expected one column, got shape {energies.shape}")
    if energies.size == 0:
        raise DomainError(f"{path}: no energies found")
    return energies

"""Dense brute-force reference for the broadcasting bounds.

Builds the agreement-optimal unitary on system + n_p pointers, evolves the
joint state and reads the pointer statistics off directly. Sizes are capped:
this is a checker, not a simulator.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse

from . import bounds
from .core import INTERNAL_TOL, total_variation, validate_prob
from .errors import (
    DimensionError,
    ResourceError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .partition import Partition, boltzmann_weights, greedy_partition

logger = logging.getLogger(__name__)

MAX_DIMENSION = 2 ** 14
# full density-matrix evolution (coherent system input) is kept smaller
MAX_DENSE_DIMENSION = 2 ** 12


@dataclass(frozen=True)
class DenseState:
    matrix: np.ndarray
    dims: Tuple[int, int, int]

    def check(self, tol: float = 1e-10) -> None:
        m = self.matrix
        if abs(np.trace(m) - 1.0) > tol:
            raise ValidationError(f"trace is {np.trace(m)!r}")
        if np.abs(m - m.conj().T).max() > tol:
            raise ValidationError("state is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValidationError("state has a negative eigenvalue")


@dataclass(frozen=True)
class BroadcastUnitary:
    """Permutation unitary: basis state s is sent to perm[s].

    Index of |s>|i_1 ... i_n> is s * d_P**n + ravel(i_1, ..., i_n).
    """

    perm: np.ndarray
    dims: Tuple[int, int, int]
    partition: Optional[Partition] = None

    @property
    def matrix(self) -> scipy.sparse.csr_array:
        n = self.perm.size
        return scipy.sparse.csr_array(
            (np.ones(n), (self.perm, np.arange(n))), shape=(n, n)
        )

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def fixed_points(self) -> np.ndarray:
        return np.flatnonzero(self.perm == np.arange(self.perm.size))


@dataclass(frozen=True)
class BroadcastStatistics:
    agreement: float
    local_probs: Tuple[np.ndarray, ...]
    joint: Dict[Tuple[int, ...], float]
    bias: Tuple[float, ...]

    @property
    def off_diagonal_mass(self) -> float:
        return math.fsum(
            v for k, v in self.joint.items() if any(x != k[0] for x in k)
        )


@dataclass(frozen=True)
class OzawaReport:
    reproducibility_defect: float
    off_diagonal_mass: float
    agreement: float

    @property
    def reproducible(self) -> bool:
        return self.reproducibility_defect <= INTERNAL_TOL

    @property
    def consistent(self) -> bool:
        """Reproducible local statistics must come with zero disagreement."""
        return not self.reproducible or self.off_diagonal_mass <= INTERNAL_TOL

    def to_dict(self) -> dict:
        return {
            "reproducibility_defect": self.reproducibility_defect,
            "off_diagonal_mass": self.off_diagonal_mass,
            "agreement": self.agreement,
            "reproducible": self.reproducible,
            "consistent": self.consistent,
        }


def _check_size(d_s: int, d_p: int, n_p: int, cap: int = MAX_DIMENSION) -> int:
    if n_p < 1:
        raise DimensionError(f"need at least one pointer, got {n_p}")
    total = d_s * d_p ** n_p
    if total > cap:
        raise ResourceError(
            f"d_S * d_P^n_p = {d_s}*{d_p}^{n_p} = {total} exceeds the cap {cap}"
        )
    return total


def _pointer_tuples(d_p: int, n_p: int) -> np.ndarray:
    """Shape (n_p, d_p**n_p): level of each pointer for every pointer basis index."""
    return np.array(np.unravel_index(np.arange(d_p ** n_p), (d_p,) * n_p))


def computational_partition(weights: Sequence[float]) -> Partition:
    """D_x = {x}: each pointer level is its own outcome."""
    w = np.asarray(weights, dtype=float)
    return Partition(
        assignment={x: (x,) for x in range(w.size)},
        avector=tuple(float(v) for v in w),
        weights=tuple(float(v) for v in w),
    )


def build_optimal_unitary(d_s: int, partition: Partition, n_p: int) -> BroadcastUnitary:
    """U = V + W with V = sum_{x,y} |y><x| (x) T_{x,y}^{(x) n_p} and W = 1.

    T_{x,y} sends the k-th level of D_y to the k-th level of D_x, levels in
    each D_x ordered by descending weight.
    """
    dims = partition.dims
    if len(dims) != d_s:
        raise DimensionError(f"partition has {len(dims)} outcomes, system has {d_s}")
    if len(set(dims)) != 1:
        raise UnsupportedConfigurationError(
            f"broadcast unitary needs equal subspace dims, got {dims}"
        )
    d_p = len(partition.weights)
    if sum(dims) != d_p:
        raise UnsupportedConfigurationError(
            f"subspaces cover {sum(dims)} of {d_p} pointer levels"
        )
    total = _check_size(d_s, d_p, n_p)

    labels = partition.labels()
    position = np.empty(d_p, dtype=int)
    for idx in partition.assignment.values():
        position[list(idx)] = np.arange(len(idx))
    members = np.array([partition.assignment[x] for x in range(d_s)])

    levels = _pointer_tuples(d_p, n_p)
    lab = labels[levels]
    same = np.all(lab == lab[0], axis=0)
    cols = np.flatnonzero(same)
    y = lab[0, cols]
    pos = position[levels[:, cols]]

    block = d_p ** n_p
    perm = np.arange(total)
    for x in range(d_s):
        # |x>|k-th levels of D_y ...>  ->  |y>|k-th levels of D_x ...>
        targets = np.ravel_multi_index(tuple(members[x][pos]), (d_p,) * n_p)
        perm[x * block + cols] = y * block + targets
    logger.debug("broadcast unitary on %d states, %d fixed", total, total - cols.size * d_s)
    return BroadcastUnitary(perm=perm, dims=(d_s, d_p, n_p), partition=partition)


def build_broadcast_circuit(d_s: int, n_p: int, d_p: Optional[int] = None) -> BroadcastUnitary:
    """Generalized SWAP (system <-> pointer 1) then CNOTs pointer 1 -> pointers 2..n_p.

    |s>|i_1, i_2, ..., i_n>  ->  |i_1>|s, i_2 + s, ..., i_n + s>  (mod d).
    """
    d_p = d_s if d_p is None else d_p
    if d_p != d_s:
        raise UnsupportedConfigurationError(
            f"circuit needs pointers of the system dimension ({d_s}), got {d_p}"
        )
    total = _check_size(d_s, d_p, n_p)
    block = d_p ** n_p
    s, rest = np.divmod(np.arange(total), block)
    levels = _pointer_tuples(d_p, n_p)[:, rest]
    new_levels = (levels + s) % d_s
    new_levels[0] = s
    perm = levels[0] * block + np.ravel_multi_index(tuple(new_levels), (d_p,) * n_p)
    return BroadcastUnitary(perm=perm, dims=(d_s, d_p, n_p))


def _evolved_probabilities(
    p: np.ndarray,
    w: np.ndarray,
    unitary: BroadcastUnitary,
    n_p: int,
    rho_s: Optional[np.ndarray],
) -> np.ndarray:
    pointer_diag = reduce(np.kron, [w] * n_p)
    if rho_s is None:
        probs = np.empty(unitary.perm.size)
        probs[unitary.perm] = np.kron(p, pointer_diag)
        return probs

    rho_s = np.asarray(rho_s, dtype=complex)
    if not np.allclose(np.real(np.diag(rho_s)), p, atol=INTERNAL_TOL):
        raise ValidationError("rho_s diagonal does not match rho_s_diag")
    _check_size(p.size, w.size, n_p, cap=MAX_DENSE_DIMENSION)
    state = DenseState(np.kron(rho_s, np.diag(pointer_diag)), (p.size, w.size, n_p))
    state.check()
    u = unitary.matrix
    evolved = DenseState(np.asarray(u @ np.asarray(u @ state.matrix).T).T, state.dims)
    evolved.check()
    return np.real(np.diag(evolved.matrix))


def broadcast_statistics(
    rho_s_diag: Sequence[float],
    pointer_weights: Sequence[float],
    partition: Partition,
    n_p: int,
    rho_s: Optional[np.ndarray] = None,
    unitary: Optional[BroadcastUnitary] = None,
) -> BroadcastStatistics:
    """Measure every pointer in the D_x basis after the broadcast.

    ``rho_s`` optionally supplies a full system density matrix (coherences
    included) with the given diagonal; ``unitary`` replaces the optimal one.
    """
    p = validate_prob(rho_s_diag)
    w = validate_prob(pointer_weights)
    d_s, d_p = p.size, w.size
    if unitary is None:
        unitary = build_optimal_unitary(d_s, partition, n_p)
    if unitary.dims != (d_s, d_p, n_p):
        raise DimensionError(f"unitary built for {unitary.dims}, state is {(d_s, d_p, n_p)}")
    labels = partition.labels()
    if labels.size != d_p or np.any(labels < 0):
        raise UnsupportedConfigurationError("partition must cover every pointer level")

    probs = _evolved_probabilities(p, w, unitary, n_p, rho_s)
    pointer_probs = probs.reshape((d_s,) + (d_p,) * n_p).sum(axis=0)

    outcome_of = np.zeros((d_p, d_s))
    outcome_of[np.arange(d_p), labels] = 1.0
    joint = pointer_probs
    for _ in range(n_p):
        # contracting the leading axis appends the outcome axis at the end
        joint = np.tensordot(joint, outcome_of, axes=([0], [0]))

    diagonal = [joint[(x,) * n_p] for x in range(d_s)]
    agreement = math.fsum(diagonal)
    local = []
    for i in range(n_p):
        others = tuple(k for k in range(n_p) if k != i)
        local.append(joint.sum(axis=others) if others else joint.copy())
    joint_map = {
        tuple(int(v) for v in idx): float(val) for idx, val in np.ndenumerate(joint)
    }
    return BroadcastStatistics(
        agreement=agreement,
        local_probs=tuple(local),
        joint=joint_map,
        bias=tuple(total_variation(m, p) for m in local),
    )


def ozawa_check(
    rho_s_diag: Sequence[float],
    partition: Partition,
    n_p: int,
    unitary: Optional[BroadcastUnitary] = None,
) -> OzawaReport:
    """Report whether reproducible local statistics come with full agreement.

    The pointer state is the one the partition was built from.
    """
    stats = broadcast_statistics(
        rho_s_diag, partition.weights, partition, n_p, unitary=unitary
    )
    p = np.asarray(rho_s_diag, dtype=float)
    defect = max(total_variation(m, p) for m in stats.local_probs)
    report = OzawaReport(
        reproducibility_defect=defect,
        off_diagonal_mass=stats.off_diagonal_mass,
        agreement=stats.agreement,
    )
    if not report.reproducible:
        logger.info("local statistics deviate from p_S by %.3e", defect)
    return report


def oracle_report(
    p_s: Sequence[float],
    subspace_dims: Sequence[int],
    n_p: int,
    beta: float,
    energies: Optional[Sequence[float]] = None,
) -> dict:
    """Dense statistics next to the closed-form bounds for one thermal pointer.

    Energies default to equally spaced levels 0, 1, ..., d_P - 1 with
    d_P = sum(subspace_dims).
    """
    p = validate_prob(p_s)
    d_p = int(sum(subspace_dims))
    if energies is None:
        energies = np.arange(d_p, dtype=float)
    if len(energies) != d_p:
        raise DimensionError(f"{len(energies)} energies for {d_p} pointer levels")
    weights = boltzmann_weights(energies, beta)
    part = greedy_partition(weights, subspace_dims)
    stats = broadcast_statistics(p, weights, part, n_p)

    gamma_formula, _ = bounds.max_agreement(part.avector, n_p)
    local_formula = bounds.local_probabilities(part.avector, n_p, p)
    bias_formula = bounds.optimal_bias(part.avector, n_p, p)
    diffs = [abs(stats.agreement - gamma_formula)]
    diffs += [abs(b - bias_formula) for b in stats.bias]
    diffs += [float(np.abs(m - local_formula).max()) for m in stats.local_probs]
    return {
        "gamma_dense": stats.agreement,
        "gamma_formula": gamma_formula,
        "local_probs": [float(v) for v in stats.local_probs[0]],
        "bias_dense": stats.bias[0],
        "bias_formula": bias_formula,
        "max_abs_diff": max(diffs),
    }

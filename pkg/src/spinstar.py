"""Central-spin dephasing model with thermal qubit pointers.

A system qubit couples to every pointer through H = g/2 sigma_z (x) sigma_z, so
pointer states in the two system branches rotate in opposite directions about
z. The l_cg-fold branch state of a macrofraction is block diagonal in total
spin: blocks N_j^(x) of size 2j+1, each repeated B_j times. Observers measure
each macrofraction with the Helstrom measurement built blockwise, which is
what makes l_cg up to 128 tractable.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import expit, xlogy

from . import coarsegrain
from .errors import ConfigurationError, DomainError, ResourceError
from .numerics import EigenSystem, eigh, euler_rotation
from .workers import parallel_map

logger = logging.getLogger(__name__)

MAX_LCG = 128
MAX_DENSE_LCG = 6
# Λ eigenvalues within this fraction of the block scale count as zero
HELSTROM_RTOL = 1e-12
LOG_UNDERFLOW = math.log(1e-300)

POINTER_ENERGY_SCALE = {"half": 0.5, "unit": 1.0}


@dataclass(frozen=True)
class PointerThermal:
    """Thermal pointer diagonal in the sigma_x basis, written in the sigma_z basis.

    ``beta_e`` is the Euler angle of the rotation taking diag(λ+, λ−) to ρ_P.
    """

    beta: float
    lambda_plus: float
    lambda_minus: float
    rho00: float
    rho01: float
    beta_e: float
    pointer_h: str = "half"

    def density_matrix(self) -> np.ndarray:
        return np.array([[self.rho00, self.rho01], [self.rho01, 1.0 - self.rho00]], dtype=complex)


def thermal_pointer(beta: float, pointer_h: str = "half") -> PointerThermal:
    """Gibbs state of H_P = sigma_x / 2 ("half") or sigma_x ("unit")."""
    if not math.isfinite(beta) or beta < 0:
        raise DomainError(f"inverse temperature must be finite and >= 0, got {beta!r}")
    if pointer_h not in POINTER_ENERGY_SCALE:
        raise DomainError(f"pointer Hamiltonian must be one of {sorted(POINTER_ENERGY_SCALE)}")
    x = POINTER_ENERGY_SCALE[pointer_h] * beta
    lam_plus = float(expit(2.0 * x))
    lam_minus = float(expit(-2.0 * x))
    rho00 = 0.5
    rho01 = -0.5 * math.tanh(x)

    norm = math.hypot(rho01, rho00 - lam_plus)
    if norm == 0.0:
        beta_e = 0.0
    else:
        # (cos, sin) of beta_e/2 is the λ+ eigenvector of ρ_P
        beta_e = 2.0 * math.atan2(-(rho00 - lam_plus) / norm, rho01 / norm)
    return PointerThermal(
        beta=beta,
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        rho00=rho00,
        rho01=rho01,
        beta_e=beta_e,
        pointer_h=pointer_h,
    )


def spin_ladder(l_cg: int) -> List[int]:
    """Values of 2j in the decomposition of l_cg spin-1/2: l, l-2, ..., 0 or 1."""
    return list(range(l_cg, -1, -2))


def degeneracy(l_cg: int, j) -> int:
    """Multiplicity B_j = C(l, l/2 - j) - C(l, l/2 - j - 1) of spin j."""
    two_j = 2 * Fraction(j)
    if two_j.denominator != 1 or two_j < 0 or two_j > l_cg or (l_cg - two_j) % 2:
        raise DomainError(f"j={j} is not on the spin ladder of l_cg={l_cg}")
    k = (l_cg - int(two_j)) // 2
    return math.comb(l_cg, k) - (math.comb(l_cg, k - 1) if k >= 1 else 0)


@dataclass(frozen=True)
class SpinBlock:
    two_j: int
    degeneracy: int
    n0: np.ndarray
    n1: np.ndarray

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)

    @property
    def scale(self) -> float:
        return float(max(np.abs(self.n0).max(), np.abs(self.n1).max()))


@dataclass(frozen=True)
class SpinBlockSet:
    l_cg: int
    blocks: Tuple[SpinBlock, ...]
    underflow_count: int = 0

    def total_dimension(self) -> int:
        return sum(b.degeneracy * (b.two_j + 1) for b in self.blocks)

    def branch_trace(self, branch: int) -> float:
        return math.fsum(
            b.degeneracy * float(np.real(np.trace(b.n1 if branch else b.n0)))
            for b in self.blocks
        )


def _log_diagonal(l_cg: int, two_j: int, lam_a: float, lam_b: float) -> np.ndarray:
    """log of lam_a^(l/2+m) lam_b^(l/2-m) for m = j ... -j."""
    m = two_j / 2 - np.arange(two_j + 1)
    return xlogy(l_cg / 2 + m, lam_a) + xlogy(l_cg / 2 - m, lam_b)


def _hermitian(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def branch_blocks(pt: PointerThermal, l_cg: int, g: float, t: float) -> SpinBlockSet:
    """Per-spin blocks of both branch states at time t.

    N_j^(0) = R M_j^(0) R^dagger with R = R^j(gt, beta_e, gt), which equals the
    block of (V(t) ρ_P V(t)^dagger)^(x) l; branch 1 negates all three angles
    and swaps λ+ and λ−.
    """
    if int(l_cg) != l_cg or l_cg < 1:
        raise DomainError(f"l_cg must be a positive integer, got {l_cg!r}")
    if l_cg > MAX_LCG:
        raise ResourceError(f"l_cg={l_cg} exceeds the supported maximum {MAX_LCG}")
    theta = g * t
    blocks = []
    flushed = 0
    for tj in spin_ladder(l_cg):
        diags = []
        for lam_a, lam_b in ((pt.lambda_plus, pt.lambda_minus), (pt.lambda_minus, pt.lambda_plus)):
            logs = _log_diagonal(l_cg, tj, lam_a, lam_b)
            small = logs < LOG_UNDERFLOW
            flushed += int(small.sum())
            diags.append(np.where(small, 0.0, np.exp(np.maximum(logs, LOG_UNDERFLOW))))
        r0 = euler_rotation(tj / 2, theta, pt.beta_e, theta)
        r1 = euler_rotation(tj / 2, -theta, -pt.beta_e, -theta)
        blocks.append(
            SpinBlock(
                two_j=tj,
                degeneracy=degeneracy(l_cg, Fraction(tj, 2)),
                n0=_hermitian((r0 * diags[0]) @ r0.conj().T),
                n1=_hermitian((r1 * diags[1]) @ r1.conj().T),
            )
        )
    if flushed:
        logger.warning("l_cg=%d: %d block weights below 1e-300 flushed to 0", l_cg, flushed)
    return SpinBlockSet(l_cg=int(l_cg), blocks=tuple(blocks), underflow_count=flushed)


@dataclass(frozen=True)
class BlockMeasurement:
    two_j: int
    spectrum: EigenSystem
    outcome: np.ndarray
    zero_tol: float

    @property
    def projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        v = self.spectrum.eigenvectors
        out = []
        for x in (0, 1):
            cols = v[:, self.outcome == x]
            out.append(cols @ cols.conj().T)
        return out[0], out[1]


@dataclass(frozen=True)
class HelstromMeasurement:
    blocks: Tuple[BlockMeasurement, ...]

    @property
    def informative(self) -> bool:
        """False when Λ vanishes in every block (branches indistinguishable)."""
        return any(
            np.any(np.abs(b.spectrum.eigenvalues) > b.zero_tol) for b in self.blocks
        )


def helstrom_blocks(blocks: SpinBlockSet) -> HelstromMeasurement:
    """Diagonalize Λ_j = (N_j^(0) - N_j^(1)) / 2 block by block.

    Negative eigenvalues go to outcome 1; nonnegative ones, including those
    numerically zero, to outcome 0.
    """
    out = []
    for b in blocks.blocks:
        spectrum = eigh(0.5 * (b.n0 - b.n1), scale=b.scale)
        tol = HELSTROM_RTOL * b.scale
        outcome = np.where(spectrum.eigenvalues < -tol, 1, 0)
        out.append(BlockMeasurement(two_j=b.two_j, spectrum=spectrum, outcome=outcome, zero_tol=tol))
    return HelstromMeasurement(blocks=tuple(out))


def _expectations(vectors: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ik,ij,jk->k", vectors.conj(), matrix, vectors))


def branch_probabilities(blocks: SpinBlockSet, measurement: HelstromMeasurement) -> np.ndarray:
    """2x2 array P with P[x, y] = p_t(x | ρ_y^(x) l)."""
    terms = [[[], []], [[], []]]
    for b, meas in zip(blocks.blocks, measurement.blocks):
        v = meas.spectrum.eigenvectors
        for y, n in ((0, b.n0), (1, b.n1)):
            diag = _expectations(v, n)
            for x in (0, 1):
                terms[x][y].append(b.degeneracy * math.fsum(diag[meas.outcome == x]))
    return np.array([[math.fsum(terms[x][y]) for y in (0, 1)] for x in (0, 1)])


def helstrom_error(blocks: SpinBlockSet, measurement: HelstromMeasurement) -> Tuple[float, float]:
    """(equiprobable error probability, trace norm of Λ)."""
    norm = math.fsum(
        b.degeneracy * math.fsum(np.abs(m.spectrum.eigenvalues))
        for b, m in zip(blocks.blocks, measurement.blocks)
    )
    return 0.5 * (1.0 - norm), norm


@dataclass(frozen=True)
class ScanRecord:
    t: float
    l_cg: int
    p_correct_0: float
    p_correct_1: float
    p_out: Tuple[float, float]
    agreement: float
    bias: float
    informative: bool = True

    COLUMNS = ("t", "l_cg", "p_correct_0", "p_correct_1", "p_out_0", "agreement", "bias")

    def to_row(self) -> tuple:
        return (
            self.t, self.l_cg, self.p_correct_0, self.p_correct_1,
            self.p_out[0], self.agreement, self.bias,
        )


def _check_sizes(l_cg: int, n_total: int) -> int:
    if l_cg < 1 or n_total < 1:
        raise ConfigurationError(f"l_cg and n_total must be positive ({l_cg}, {n_total})")
    if n_total % l_cg:
        raise ConfigurationError(f"l_cg={l_cg} does not divide n_total={n_total}")
    return n_total // l_cg


def observables_at(
    pt: PointerThermal, l_cg: int, n_total: int, p0: float, g: float, t: float
) -> ScanRecord:
    """Statistics of n_total / l_cg observers each measuring one macrofraction.

    Agreement is the probability that all observers report the same outcome:
    sum_y p_y sum_x p_t(x | ρ_y)^K with K = n_total / l_cg.
    """
    n_obs = _check_sizes(l_cg, n_total)
    if not 0.0 <= p0 <= 1.0:
        raise DomainError(f"p0 must lie in [0, 1], got {p0!r}")
    priors = (p0, 1.0 - p0)

    blocks = branch_blocks(pt, l_cg, g, t)
    meas = helstrom_blocks(blocks)
    probs = branch_probabilities(blocks, meas)

    p_out = tuple(math.fsum(priors[y] * probs[x, y] for y in (0, 1)) for x in (0, 1))
    agreement = math.fsum(
        priors[y] * math.fsum(probs[x, y] ** n_obs for x in (0, 1)) for y in (0, 1)
    )
    bias = 0.5 * (abs(p_out[0] - priors[0]) + abs(p_out[1] - priors[1]))
    return ScanRecord(
        t=float(t),
        l_cg=int(l_cg),
        p_correct_0=float(probs[0, 0]),
        p_correct_1=float(probs[1, 1]),
        p_out=p_out,
        agreement=agreement,
        bias=bias,
        informative=meas.informative,
    )


@dataclass(frozen=True)
class TimeScanSummary:
    min_bias: float
    max_agreement: float
    min_disagreement: float
    t_min_bias: float
    t_max_agreement: float
    n_informative: int


@dataclass(frozen=True)
class TimeScan:
    records: Tuple[ScanRecord, ...]
    summary: TimeScanSummary


def summarize(records: Sequence[ScanRecord]) -> TimeScanSummary:
    """Extrema over the records where the branches can be told apart.

    Where they coincide every observer answers 0, which is full agreement
    carrying no information; those records only count if nothing else exists.
    """
    informative = [r for r in records if r.informative]
    pool = informative or list(records)
    best_bias = min(pool, key=lambda r: r.bias)
    best_agreement = max(pool, key=lambda r: r.agreement)
    return TimeScanSummary(
        min_bias=best_bias.bias,
        max_agreement=best_agreement.agreement,
        min_disagreement=1.0 - best_agreement.agreement,
        t_min_bias=best_bias.t,
        t_max_agreement=best_agreement.t,
        n_informative=len(informative),
    )


def time_grid(t_max: float = 6.0, t_steps: int = 240) -> np.ndarray:
    if t_steps < 1:
        raise DomainError(f"time grid needs at least one point, got {t_steps}")
    return np.linspace(0.0, t_max, t_steps)


def time_scan(
    pt: PointerThermal,
    l_cg: int,
    n_total: int,
    p0: float,
    g: float,
    t_grid: Sequence[float],
    workers: int = 1,
) -> TimeScan:
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise DomainError("time grid is empty")
    _check_sizes(l_cg, n_total)
    records = parallel_map(
        lambda t: observables_at(pt, l_cg, n_total, p0, g, t), t_grid, workers
    )
    summary = summarize(records)
    logger.debug(
        "l_cg=%d: min bias %.6g at t=%.4g, max agreement %.6g at t=%.4g",
        l_cg, summary.min_bias, summary.t_min_bias,
        summary.max_agreement, summary.t_max_agreement,
    )
    return TimeScan(records=tuple(records), summary=summary)


@dataclass(frozen=True)
class SweepRow:
    l_cg: int
    min_dis_model: float
    bound_dis: float
    min_bias_model: float
    bound_bias: float

    COLUMNS = ("l_cg", "min_dis_model", "bound_dis", "min_bias_model", "bound_bias")

    def to_row(self) -> tuple:
        return (self.l_cg, self.min_dis_model, self.bound_dis, self.min_bias_model, self.bound_bias)


def lcg_sweep(
    pt: PointerThermal,
    n_total: int,
    p0: float,
    g: float,
    t_grid: Sequence[float],
    lcg_list: Sequence[int],
    workers: int = 1,
    on_row=None,
) -> List[SweepRow]:
    """Model extrema over time per macrofraction size, next to the
    coarse-grained bounds for a = (λ+, λ−) and n_total / l_cg observers."""
    for l_cg in lcg_list:
        _check_sizes(l_cg, n_total)
    a = (pt.lambda_plus, pt.lambda_minus)
    rows = []
    for l_cg in lcg_list:
        scan = time_scan(pt, l_cg, n_total, p0, g, t_grid, workers)
        bound = coarsegrain.cg_metrics(a, l_cg, n_total // l_cg, (p0, 1.0 - p0))
        row = SweepRow(
            l_cg=int(l_cg),
            min_dis_model=scan.summary.min_disagreement,
            bound_dis=1.0 - bound.gamma_cg,
            min_bias_model=scan.summary.min_bias,
            bound_bias=bound.bias_cg,
        )
        logger.info("l_cg=%d done: model disagreement %.6g, bound %.6g",
                    l_cg, row.min_dis_model, row.bound_dis)
        if on_row:
            on_row(row)
        rows.append(row)
    return rows


def dense_branch_states(pt: PointerThermal, l_cg: int, g: float, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """(V(t) ρ_P V(t)^dagger)^(x) l and the same at -t, as 2^l x 2^l matrices."""
    if int(l_cg) != l_cg or l_cg < 1:
        raise DomainError(f"l_cg must be a positive integer, got {l_cg!r}")
    if l_cg > MAX_DENSE_LCG:
        raise ResourceError(f"dense branch states limited to l_cg <= {MAX_DENSE_LCG}")
    rho = pt.density_matrix()
    out = []
    for sign in (1.0, -1.0):
        phase = np.exp(-0.5j * sign * g * t * np.array([1.0, -1.0]))
        single = phase[:, np.newaxis] * rho * phase.conj()[np.newaxis, :]
        out.append(_hermitian(reduce(np.kron, [single] * int(l_cg))))
    return out[0], out[1]


def dense_check(pt: PointerThermal, l_cg: int, g: float, t: float) -> float:
    """Largest |p_t(x|ρ_y)| difference between the block method and a dense
    Helstrom measurement on the full 2^l dimensional branch states."""
    rho0, rho1 = dense_branch_states(pt, l_cg, g, t)
    scale = max(np.abs(rho0).max(), np.abs(rho1).max())
    spectrum = eigh(0.5 * (rho0 - rho1), scale=scale)
    tol = HELSTROM_RTOL * scale
    outcome = np.where(spectrum.eigenvalues < -tol, 1, 0)
    v = spectrum.eigenvectors
    dense = np.empty((2, 2))
    for y, rho in ((0, rho0), (1, rho1)):
        diag = _expectations(v, rho)
        for x in (0, 1):
            dense[x, y] = math.fsum(diag[outcome == x])

    blocks = branch_blocks(pt, l_cg, g, t)
    block = branch_probabilities(blocks, helstrom_blocks(blocks))
    return float(np.abs(dense - block).max())

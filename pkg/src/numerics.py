"""Dense Hermitian eigendecomposition and spin-j rotation matrices."""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .errors import DomainError, ValidationError

HERMITIAN_RTOL = 1e-12
# components below this fraction of the column norm do not fix the phase
PHASE_FLOOR = 1e-10

SpinLabel = Union[int, float, Fraction]


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    out = vectors.astype(complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        scale = np.abs(col).max()
        first = int(np.flatnonzero(np.abs(col) > PHASE_FLOOR * scale)[0])
        out[:, k] = col * (abs(col[first]) / col[first])
    return out


def eigh(m: np.ndarray, scale: Optional[float] = None) -> EigenSystem:
    """Hermitian eigendecomposition with phase-fixed eigenvectors.

    Asymmetry is measured against ``scale`` when given, else against the
    matrix's largest entry; differences of nearly equal matrices should pass
    the scale of the operands.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    ref = np.abs(m).max() if scale is None else scale
    ref = max(float(ref), np.finfo(float).tiny)
    asym = np.abs(m - m.conj().T).max()
    if asym > HERMITIAN_RTOL * ref:
        raise ValidationError(f"matrix is not Hermitian (max |M - M^H| = {asym:.3e})")
    values, vectors = scipy.linalg.eigh(0.5 * (m + m.conj().T))
    return EigenSystem(eigenvalues=values, eigenvectors=_fix_phases(vectors))


def two_j(j: SpinLabel) -> int:
    """Return 2j as an int, rejecting anything that is not a half-integer >= 0."""
    doubled = 2 * float(j)
    tj = round(doubled)
    if tj < 0 or abs(doubled - tj) > 1e-9:
        raise DomainError(f"spin label must be a nonnegative half-integer, got {j!r}")
    return int(tj)


@lru_cache(maxsize=None)
def _spin_operators(tj: int) -> Tuple[np.ndarray, np.ndarray]:
    j = tj / 2
    m = j - np.arange(tj + 1)
    # <j, m+1| J+ |j, m>, placed on the superdiagonal since m runs downward
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    j_plus = np.diag(ladder, k=1).astype(complex)
    j_y = (j_plus - j_plus.conj().T) / 2j
    j_z = np.diag(m).astype(complex)
    j_y.setflags(write=False)
    j_z.setflags(write=False)
    return j_y, j_z


def spin_operators(j: SpinLabel) -> Tuple[np.ndarray, np.ndarray]:
    """(J_y, J_z) in the |j, m> basis with m = j, j-1, ..., -j."""
    return _spin_operators(two_j(j))


@lru_cache(maxsize=None)
def _jy_spectrum(tj: int) -> EigenSystem:
    j_y, _ = _spin_operators(tj)
    return eigh(j_y)


def euler_rotation(j: SpinLabel, alpha: float, beta_e: float, gamma_e: float) -> np.ndarray:
    """R(alpha, beta, gamma) = exp(-i alpha J_z) exp(-i beta J_y) exp(-i gamma J_z)."""
    tj = two_j(j)
    m = tj / 2 - np.arange(tj + 1)
    spec = _jy_spectrum(tj)
    v = spec.eigenvectors
    small_d = (v * np.exp(-1j * beta_e * spec.eigenvalues)) @ v.conj().T
    left = np.exp(-1j * alpha * m)
    right = np.exp(-1j * gamma_e * m)
    return left[:, np.newaxis] * small_d * right[np.newaxis, :]

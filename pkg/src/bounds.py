"""Closed-form finite-resource bounds: maximal agreement, noise distribution,
optimal bias and the observers' local statistics at the optimum.

All functions take the subspace-trace vector ``a`` (one entry per outcome) and
infer the outcome count from its length.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import as_vector, total_variation
from .errors import DimensionError, DomainError, SingularityError

logger = logging.getLogger(__name__)

# Below this disagreement the noise distribution is a 0/0 and is not exposed.
SINGULAR_DELTA = 1e-14


@dataclass(frozen=True)
class BoundReport:
    gamma: float
    delta: float
    mstar: Optional[Tuple[float, ...]]
    bias: float
    local_probs: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "delta": self.delta,
            "mstar": list(self.mstar) if self.mstar is not None else None,
            "bias": self.bias,
            "local_probs": list(self.local_probs),
        }


def _check_observers(n_p: int) -> None:
    if int(n_p) != n_p or n_p < 1:
        raise DomainError(f"observer count must be a positive integer, got {n_p!r}")


def _check_lengths(a: np.ndarray, p_s: np.ndarray) -> None:
    if a.shape != p_s.shape:
        raise DimensionError(
            f"a has {a.size} outcomes but p_s has {p_s.size}"
        )


def max_agreement(a: Sequence[float], n_p: int) -> Tuple[float, float]:
    """Return (gamma, delta) with gamma = sum_x a_x**n_p and delta = 1 - gamma."""
    _check_observers(n_p)
    a = as_vector(a)
    gamma = math.fsum(a ** int(n_p))
    return gamma, 1.0 - gamma


def tsallis_entropy(p: Sequence[float], q: float) -> float:
    if not q > 1:
        raise DomainError(f"Tsallis index must exceed 1, got {q!r}")
    p = as_vector(p)
    return (1.0 - math.fsum(p ** q)) / (q - 1.0)


def noise_distribution(a: Sequence[float], n_p: int) -> np.ndarray:
    """Distribution the disagreement mass is spread over at the optimum."""
    _check_observers(n_p)
    if n_p < 2:
        raise SingularityError("noise distribution needs at least two observers")
    a = as_vector(a)
    gamma, delta = max_agreement(a, n_p)
    if delta <= SINGULAR_DELTA:
        raise SingularityError(
            f"disagreement {delta!r} is zero; noise distribution undefined"
        )
    return a * (1.0 - a ** (int(n_p) - 1)) / delta


def local_probabilities(
    a: Sequence[float], n_p: int, p_s: Sequence[float]
) -> np.ndarray:
    # gamma*p + a - a^N is the same as gamma*p + delta*m* but has no 0/0.
    _check_observers(n_p)
    a, p_s = as_vector(a), as_vector(p_s)
    _check_lengths(a, p_s)
    gamma, _ = max_agreement(a, n_p)
    return gamma * p_s + a - a ** int(n_p)


def optimal_bias(a: Sequence[float], n_p: int, p_s: Sequence[float]) -> float:
    """Bias of the agreement-optimal unitary: delta * TV(p_s, m*).

    Evaluated as TV(local, p_s) so the ideal limit gives exactly 0.
    """
    _check_observers(n_p)
    a, p_s = as_vector(a), as_vector(p_s)
    _check_lengths(a, p_s)
    _, delta = max_agreement(a, n_p)
    if delta <= 0.0:
        return 0.0
    return total_variation(local_probabilities(a, n_p, p_s), p_s)


def bound_report(a: Sequence[float], n_p: int, p_s: Sequence[float]) -> BoundReport:
    a, p_s = as_vector(a), as_vector(p_s)
    _check_lengths(a, p_s)
    gamma, delta = max_agreement(a, n_p)
    mstar = None
    if n_p >= 2 and delta > SINGULAR_DELTA:
        mstar = tuple(float(v) for v in noise_distribution(a, n_p))
    else:
        logger.debug("noise distribution not exposed (n_p=%d, delta=%r)", n_p, delta)
    local = local_probabilities(a, n_p, p_s)
    return BoundReport(
        gamma=gamma,
        delta=delta,
        mstar=mstar,
        bias=optimal_bias(a, n_p, p_s),
        local_probs=tuple(float(v) for v in local),
    )

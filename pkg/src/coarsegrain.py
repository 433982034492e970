"""Coarse-grained subspace traces for macrofractions of l_cg pointers.

The l-fold tensor power of the pointer spreads its weight over multinomial
terms C(l; k_0, ..., k_{d-1}) prod_x a_x^{k_x}. Each term is credited to the
outcome that occurs most often in it (ties to the smallest index), which gives
a^(l). For two outcomes and odd l this is the binomial half-sum, also available
in closed hypergeometric form and through its large-l asymptote.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from . import bounds
from .core import as_vector
from .errors import DimensionError, DomainError, SingularityError
from .workers import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoarseGrainResult:
    l_cg: int
    avector_cg: tuple
    gamma_cg: float
    bias_cg: float

    @property
    def one_minus_a0(self) -> float:
        return math.fsum(self.avector_cg[1:])

    def to_row(self) -> dict:
        return {
            "l_cg": self.l_cg,
            "a0_cg": self.avector_cg[0],
            "gamma_cg": self.gamma_cg,
            "one_minus_a0": self.one_minus_a0,
            "bias_cg": self.bias_cg,
        }


@dataclass(frozen=True)
class AsymptoticParams:
    d_rate: float
    c_const: float
    f_const: float


def _check_l(l_cg: int) -> int:
    if int(l_cg) != l_cg or l_cg < 1:
        raise DomainError(f"l_cg must be a positive integer, got {l_cg!r}")
    return int(l_cg)


def _two_outcomes(a: Sequence[float]) -> np.ndarray:
    a = as_vector(a)
    if a.size != 2:
        raise DomainError(f"two-outcome formula called with {a.size} outcomes")
    return a


# larger composition tables are rebuilt on demand instead of cached
COMPOSITION_CACHE_ROWS = 100_000


def compositions(total: int, parts: int) -> np.ndarray:
    """All (k_0, ..., k_{parts-1}) >= 0 summing to ``total``, one per row.

    Row count is C(total + parts - 1, parts - 1). Tables up to
    COMPOSITION_CACHE_ROWS rows are cached; all are returned read-only.
    """
    if math.comb(total + parts - 1, parts - 1) <= COMPOSITION_CACHE_ROWS:
        return _cached_compositions(total, parts)
    return _build_compositions(total, parts)


@lru_cache(maxsize=256)
def _cached_compositions(total: int, parts: int) -> np.ndarray:
    return _build_compositions(total, parts)


def _build_compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        out = np.array([[total]], dtype=np.int64)
    else:
        blocks = []
        for first in range(total, -1, -1):
            rest = compositions(total - first, parts - 1)
            head = np.full((rest.shape[0], 1), first, dtype=np.int64)
            blocks.append(np.hstack([head, rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def _avector_enumerated(a: np.ndarray, l_cg: int) -> np.ndarray:
    k = compositions(l_cg, a.size)
    log_terms = (
        gammaln(l_cg + 1)
        - gammaln(k + 1).sum(axis=1)
        + xlogy(k, a[np.newaxis, :]).sum(axis=1)
    )
    terms = np.exp(log_terms)
    # argmax returns the first maximum: ties go to the smallest outcome index
    winner = np.argmax(k, axis=1)

    out = np.empty(a.size)
    for x in range(a.size):
        mine = np.sort(terms[winner == x])[::-1]
        out[x] = math.fsum(mine)
    return out


def _avector_series(a: np.ndarray, l_cg: int) -> np.ndarray:
    """Same sum organised by the winning count m of each outcome.

    Outcome x wins with k_x = m when every y < x has k_y < m and every y > x
    has k_y <= m. The other outcomes' share is the coefficient of z^(l-m) in
    a product of truncated series sum_k (a_y s z)^k / k!, with s scaling the
    coefficients away from under- and overflow.
    """
    d = a.size
    scale = max(1.0, l_cg / math.e)
    ks = np.arange(l_cg + 1)
    series = np.exp(xlogy(ks[np.newaxis, :], a[:, np.newaxis] * scale) - gammaln(ks + 1))
    log_lfact = gammaln(l_cg + 1)

    out = np.zeros(d)
    for x in range(d):
        if a[x] == 0.0:
            continue
        terms = []
        for m in range(1, l_cg + 1):
            rest = l_cg - m
            poly = np.ones(1)
            for y in range(d):
                if y == x:
                    continue
                cap = m - 1 if y < x else m
                poly = np.convolve(poly, series[y, : cap + 1])[: rest + 1]
            if poly.size <= rest or poly[rest] == 0.0:
                continue
            log_head = log_lfact - gammaln(m + 1) + m * math.log(a[x]) - rest * math.log(scale)
            terms.append(math.exp(log_head) * poly[rest])
        out[x] = math.fsum(terms)
    return out


AVECTOR_METHODS = {"series": _avector_series, "enumerate": _avector_enumerated}


def cg_avector(a: Sequence[float], l_cg: int, method: str = "series") -> np.ndarray:
    """Coarse-grained avector a^(l) for a sorted descending (a_0 = max).

    ``enumerate`` walks every multinomial composition explicitly; ``series``
    gives the same sums in polynomial time and is the default.
    """
    l_cg = _check_l(l_cg)
    if method not in AVECTOR_METHODS:
        raise DomainError(f"unknown method {method!r}; use one of {sorted(AVECTOR_METHODS)}")
    a = np.sort(as_vector(a))[::-1]
    if l_cg == 1:
        return a.copy()
    return AVECTOR_METHODS[method](a, l_cg)


def cg_a0_hypergeometric(a: Sequence[float], l_cg: int) -> float:
    """a_0^(l) for two outcomes and odd l via the terminating 2F1 sum.

    a_0^(l) = 1 - a_0^m a_1^(m+1) C(l, m+1) 2F1(1, -m; m+2; -a_1/a_0), m = (l-1)/2,
    with the series written term by term as
    sum_n [m!/(m-n)!] [(m+1)!/(m+1+n)!] (a_1/a_0)^n.
    """
    l_cg = _check_l(l_cg)
    if l_cg % 2 == 0:
        raise DomainError(f"hypergeometric form needs odd l_cg, got {l_cg}")
    a0, a1 = np.sort(_two_outcomes(a))[::-1]
    if a1 == 0.0:
        return 1.0
    m = (l_cg - 1) // 2
    n = np.arange(m + 1)
    log_series = (
        gammaln(m + 1) - gammaln(m - n + 1)
        + gammaln(m + 2) - gammaln(m + 2 + n)
        + n * (math.log(a1) - math.log(a0))
    )
    log_prefactor = (
        m * math.log(a0) + (m + 1) * math.log(a1)
        + gammaln(l_cg + 1) - gammaln(m + 2) - gammaln(m + 1)
    )
    tail = math.fsum(np.exp(log_prefactor + log_series))
    return 1.0 - tail


def asymptotic_params(a: Sequence[float]) -> AsymptoticParams:
    a0, a1 = np.sort(_two_outcomes(a))[::-1]
    if a1 <= 0.0:
        raise SingularityError("a_1 = 0: decay rate is infinite")
    if a0 == a1:
        raise SingularityError("a_0 = a_1: C(a) diverges, decay is a pure 1/sqrt(l)")
    d_rate = -math.log(2.0 * math.sqrt(a0 * a1))
    c_const = a0 / (a0 - a1)
    f_const = math.sqrt(2.0 / math.pi) * a1 * c_const
    return AsymptoticParams(d_rate=d_rate, c_const=c_const, f_const=f_const)


def asymptotic_a0(a: Sequence[float], l_cg: int) -> float:
    """Large-l estimate 1 - exp(-D (l-1)) / sqrt(l) * F."""
    l_cg = _check_l(l_cg)
    if l_cg < 3:
        raise DomainError(f"asymptotic form needs l_cg >= 3, got {l_cg}")
    a0, a1 = np.sort(_two_outcomes(a))[::-1]
    if a1 == 0.0:
        return 1.0
    params = asymptotic_params((a0, a1))
    return 1.0 - math.exp(-params.d_rate * (l_cg - 1)) / math.sqrt(l_cg) * params.f_const


def cg_metrics(
    a: Sequence[float],
    l_cg: int,
    n_observers: int,
    p_s: Sequence[float],
    method: str = "series",
) -> CoarseGrainResult:
    """Coarse-grained traces with their agreement and bias bounds.

    a^(l) comes back sorted descending, so p_s is reordered the same way
    before it meets a^(l) in the bias.
    """
    a, p_s = as_vector(a), as_vector(p_s)
    if a.size != p_s.size:
        raise DimensionError(f"a has {a.size} outcomes but p_s has {p_s.size}")
    order = np.argsort(-a, kind="stable")
    a_cg = cg_avector(a, l_cg, method)
    gamma, _ = bounds.max_agreement(a_cg, n_observers)
    bias = bounds.optimal_bias(a_cg, n_observers, p_s[order])
    return CoarseGrainResult(
        l_cg=int(l_cg),
        avector_cg=tuple(float(v) for v in a_cg),
        gamma_cg=gamma,
        bias_cg=bias,
    )


def cg_sweep(
    a: Sequence[float],
    l_values: Iterable[int],
    n_observers: int,
    p_s: Sequence[float],
    workers: int = 1,
    observers_for: Optional[Callable[[int], int]] = None,
    method: str = "series",
) -> List[CoarseGrainResult]:
    """cg_metrics over several l, in input order.

    ``observers_for`` maps l to the observer count when it depends on l
    (fixed total resources); otherwise ``n_observers`` is used throughout.
    """
    l_values = [_check_l(l) for l in l_values]
    logger.info("coarse-graining sweep over %d values of l_cg", len(l_values))

    def one(l_cg: int) -> CoarseGrainResult:
        n = observers_for(l_cg) if observers_for else n_observers
        return cg_metrics(a, l_cg, n, p_s, method)

    return parallel_map(one, l_values, workers)

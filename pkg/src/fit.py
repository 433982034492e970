"""Exponential-decay fits y = c0 * exp(c1 * x) by least squares on log y."""

import math
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import (
    DegenerateVarianceError,
    DimensionError,
    DomainError,
    InsufficientDataError,
)

MIN_POINTS = 3


@dataclass(frozen=True)
class FitResult:
    c0: float
    c1: float
    r_squared: float
    n_points: int

    def predict(self, x):
        return self.c0 * np.exp(self.c1 * np.asarray(x, dtype=float))

    def to_dict(self) -> dict:
        return asdict(self)


def r_squared(observed: Sequence[float], fitted: Sequence[float]) -> float:
    """Coefficient of determination 1 - S_res / S_tot."""
    observed = np.asarray(observed, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    if observed.shape != fitted.shape:
        raise DimensionError(f"{observed.size} observed vs {fitted.size} fitted values")
    if observed.size < 2:
        raise InsufficientDataError("R^2 needs at least two points")
    s_tot = math.fsum((observed - observed.mean()) ** 2)
    if s_tot == 0.0:
        raise DegenerateVarianceError("observed values are all identical")
    s_res = math.fsum((observed - fitted) ** 2)
    return 1.0 - s_res / s_tot


def fit_exponential(points: Sequence[Tuple[float, float]], skip_first: int = 0) -> FitResult:
    """Fit c0 * exp(c1 * x) to (x, y) pairs after dropping the first ``skip_first``.

    R^2 is reported on the log scale, where the regression is done.
    """
    if skip_first < 0:
        raise DomainError(f"skip_first must be >= 0, got {skip_first}")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)[skip_first:]
    if pts.shape[0] < MIN_POINTS:
        raise InsufficientDataError(
            f"{pts.shape[0]} usable points after skipping {skip_first}; need {MIN_POINTS}"
        )
    x, y = pts[:, 0], pts[:, 1]
    bad = np.flatnonzero(~(y > 0))
    if bad.size:
        i = int(bad[0]) + skip_first
        raise DomainError(f"point {i} has nonpositive y ({pts[bad[0], 1]!r})")

    log_y = np.log(y)
    reg = stats.linregress(x, log_y)
    fitted = reg.intercept + reg.slope * x
    return FitResult(
        c0=math.exp(reg.intercept),
        c1=float(reg.slope),
        r_squared=r_squared(log_y, fitted),
        n_points=int(x.size),
    )

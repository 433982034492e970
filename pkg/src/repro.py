"""Canned reproductions: the decay fits of 1 - a_0^(l) and the spin-star sweep
over macrofraction sizes."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import coarsegrain, fit, spinstar
from .errors import DomainError

logger = logging.getLogger(__name__)

# Published (c0, c1, R^2) for 1 - a_0^(l) with a_d = (1/d + 0.1, rest uniform).
REFERENCE_FITS: Dict[int, Tuple[float, float, float]] = {
    2: (0.30992, -0.02747, 0.99726),
    3: (0.40351, -0.01982, 0.99943),
    4: (0.48630, -0.01875, 0.99966),
    5: (0.53518, -0.01869, 0.99988),
}

DECAY_COLUMNS = (
    "d_s", "c0", "c1", "r_squared", "n_points", "ref_c0", "ref_c1", "ref_r_squared",
)

SWEEP_LCG = (1, 2, 4, 8, 16, 32, 64)


@dataclass(frozen=True)
class DecayRow:
    d_s: int
    result: fit.FitResult
    reference: Optional[Tuple[float, float, float]]

    def to_row(self) -> tuple:
        ref = self.reference or (None, None, None)
        r = self.result
        return (self.d_s, r.c0, r.c1, r.r_squared, r.n_points, *ref)


def near_uniform_avector(d_s: int, excess: float = 0.1) -> List[float]:
    """a_0 = 1/d + excess, the other outcomes share the rest equally."""
    if d_s < 2:
        raise DomainError(f"need at least two outcomes, got {d_s}")
    rest = 1.0 / d_s - excess / (d_s - 1)
    if rest <= 0:
        raise DomainError(f"excess {excess} leaves no weight for {d_s - 1} outcomes")
    return [1.0 / d_s + excess] + [rest] * (d_s - 1)


def decay_grid(d_s: int, l_max_binary: int = 121, l_max: int = 100) -> List[int]:
    """Odd l for two outcomes (even l only add ties there), every l otherwise."""
    if d_s == 2:
        return list(range(1, l_max_binary + 1, 2))
    return list(range(1, l_max + 1))


class Reproduction:
    """Runs a reproduction step by step, reporting through callbacks."""

    def __init__(
        self,
        workers: int = 1,
        on_status: Optional[Callable[[str], None]] = None,
        on_step: Optional[Callable[[object], None]] = None,
    ):
        self.workers = workers
        self.on_status = on_status
        self.on_step = on_step

    def _status(self, msg: str) -> None:
        logger.info(msg)
        if self.on_status:
            self.on_status(msg)

    def _step(self, result) -> None:
        if self.on_step:
            self.on_step(result)

    def decay_table(
        self,
        dims: Sequence[int] = (2, 3, 4, 5),
        skip_first: int = 1,
        l_max_binary: int = 121,
        l_max: int = 100,
    ) -> List[DecayRow]:
        rows = []
        for d_s in dims:
            a = near_uniform_avector(d_s)
            grid = decay_grid(d_s, l_max_binary, l_max)
            self._status(f"d_S={d_s}: 1 - a_0 over {len(grid)} values of l_cg")
            # observer count does not enter a_0^(l)
            sweep = coarsegrain.cg_sweep(a, grid, 2, [1.0 / d_s] * d_s, self.workers)
            points = [(r.l_cg, r.one_minus_a0) for r in sweep]
            row = DecayRow(
                d_s=d_s,
                result=fit.fit_exponential(points, skip_first=skip_first),
                reference=REFERENCE_FITS.get(d_s),
            )
            self._step(row)
            rows.append(row)
        return rows

    def lcg_sweep_table(
        self,
        n_total: int = 1024,
        beta: float = 1.0,
        p0: float = 0.2,
        g: float = 1.0,
        t_max: float = 6.0,
        t_steps: int = 240,
        lcg_list: Sequence[int] = SWEEP_LCG,
        pointer_h: str = "half",
    ) -> List[spinstar.SweepRow]:
        pt = spinstar.thermal_pointer(beta, pointer_h)
        grid = spinstar.time_grid(t_max, t_steps)
        self._status(
            f"spin star: N={n_total}, beta={beta}, {len(grid)} times, l_cg in {list(lcg_list)}"
        )
        return spinstar.lcg_sweep(
            pt, n_total, p0, g, grid, lcg_list, workers=self.workers, on_row=self._step
        )

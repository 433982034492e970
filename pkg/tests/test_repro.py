"""Tests for the canned reproductions."""

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src import repro
from src.errors import DomainError


def test_near_uniform_avector():
    """1/d + 0.1 on outcome 0, the rest shared evenly."""
    a = repro.near_uniform_avector(3)
    assert a[0] == pytest.approx(1 / 3 + 0.1)
    assert a[1] == a[2] == pytest.approx((1 - a[0]) / 2)
    assert sum(repro.near_uniform_avector(5)) == pytest.approx(1.0, abs=1e-15)


def test_near_uniform_avector_domain():
    """Too few outcomes or no room for the offset are rejected."""
    with pytest.raises(DomainError):
        repro.near_uniform_avector(1)
    with pytest.raises(DomainError):
        repro.near_uniform_avector(2, excess=0.6)


def test_decay_grid():
    """Two outcomes use odd l only; more outcomes use every l."""
    binary = repro.decay_grid(2)
    assert binary[0] == 1 and binary[-1] == 121
    assert all(l % 2 == 1 for l in binary)
    assert repro.decay_grid(3) == list(range(1, 101))
    assert repro.decay_grid(4, l_max=60)[-1] == 60


def test_decay_table_matches_reference():
    """1 - a_0^(l) decays exponentially, close to the published fits."""
    statuses, steps = [], []
    runner = repro.Reproduction(on_status=statuses.append, on_step=steps.append)
    rows = runner.decay_table()

    assert [r.d_s for r in rows] == [2, 3, 4, 5]
    assert len(statuses) == 4 and steps == rows
    for row in rows:
        ref_c0, ref_c1, _ = row.reference
        assert row.result.r_squared >= 0.995
        assert row.result.c1 < 0
        assert row.result.c0 == pytest.approx(ref_c0, rel=0.3)
        assert row.result.c1 == pytest.approx(ref_c1, rel=0.3)
    # two outcomes decay fastest
    assert abs(rows[0].result.c1) == max(abs(r.result.c1) for r in rows)
    assert rows[0].result.n_points == 60
    assert rows[1].result.n_points == 99


def test_decay_row_without_reference():
    """Outcome counts without a published fit leave the reference empty."""
    runner = repro.Reproduction()
    (row,) = runner.decay_table(dims=(6,), l_max=30)
    assert row.reference is None
    values = row.to_row()
    assert len(values) == len(repro.DECAY_COLUMNS)
    assert values[0] == 6 and values[-3:] == (None, None, None)


def test_lcg_sweep_table_reports_rows():
    """Each size is passed to on_step and returned in order."""
    steps = []
    runner = repro.Reproduction(workers=2, on_step=steps.append)
    rows = runner.lcg_sweep_table(n_total=16, t_max=3.0, t_steps=25, lcg_list=(1, 2, 4))
    assert [r.l_cg for r in rows] == [1, 2, 4]
    assert steps == rows
    for r in rows:
        assert 0.0 <= r.bound_dis <= r.min_dis_model + 1e-9

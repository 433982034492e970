"""Tests for thermal weights and the greedy subspace assignment."""

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.errors import DimensionError, DomainError, OutputError
from src.partition import (
    PointerSpec,
    boltzmann_weights,
    greedy_partition,
    pointer_partition,
    read_energies,
)


def test_boltzmann_examples():
    """Degenerate levels, infinite temperature and a two-level pointer."""
    assert np.allclose(boltzmann_weights([0.0, 0.0], 1.0), [0.5, 0.5])
    assert np.allclose(boltzmann_weights([0.0, 3.0, 7.5], 0.0), [1 / 3] * 3)
    w = boltzmann_weights([0.0, 1.0], 1.0)
    assert w[0] == pytest.approx(1 / (1 + np.exp(-1)), abs=1e-15)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


def test_boltzmann_large_beta_does_not_overflow():
    """Shifting by the ground energy keeps huge beta finite."""
    w = boltzmann_weights([0.0, 1.0, 2.0], 1e4)
    assert np.all(np.isfinite(w))
    assert w[0] == pytest.approx(1.0)


@pytest.mark.parametrize("energies, beta", [([], 1.0), ([0.0, 1.0], -1.0), ([0.0], float("inf"))])
def test_boltzmann_rejects_bad_input(energies, beta):
    """Empty spectra and invalid temperatures are domain errors."""
    with pytest.raises(DomainError):
        boltzmann_weights(energies, beta)


def test_greedy_examples():
    """Largest weights fill the largest subspace first."""
    part = greedy_partition([0.4, 0.3, 0.2, 0.1], [2, 2])
    assert part.avector == pytest.approx((0.7, 0.3))
    assert part.assignment == {0: (0, 1), 1: (2, 3)}
    assert greedy_partition([0.25] * 4, [2, 2]).avector == pytest.approx((0.5, 0.5))
    assert greedy_partition([1.0, 0.0, 0.0, 0.0], [2, 2]).avector == pytest.approx((1.0, 0.0))


def test_greedy_fills_bigger_subspace_first():
    """Unequal dims: the 3-dim subspace takes the top three weights."""
    part = greedy_partition([0.1, 0.4, 0.2, 0.3], [1, 3])
    assert part.assignment[1] == (1, 3, 2)
    assert part.assignment[0] == (0,)
    assert part.avector == pytest.approx((0.1, 0.9))
    assert part.dims == (1, 3)


def test_greedy_maximizes_agreement_over_all_splits():
    """No other 2+2 split of four weights gives a larger sum a_x^N."""
    rng = np.random.default_rng(11)
    for _ in range(30):
        w = rng.dirichlet(np.ones(4))
        best = sum(a ** 3 for a in greedy_partition(w, [2, 2]).avector)
        for pair in itertools.combinations(range(4), 2):
            a0 = w[list(pair)].sum()
            assert best >= a0 ** 3 + (1 - a0) ** 3 - 1e-15


def test_partial_cover_residual_and_renormalize():
    """Levels outside every subspace show up as residual weight."""
    w = [0.5, 0.3, 0.15, 0.05]
    part = greedy_partition(w, [1, 1])
    assert part.avector == pytest.approx((0.5, 0.3))
    assert part.residual == pytest.approx(0.2)
    assert list(part.labels()) == [0, 1, -1, -1]
    scaled = greedy_partition(w, [1, 1], renormalize=True)
    assert sum(scaled.avector) == pytest.approx(1.0)
    assert scaled.avector == pytest.approx((0.625, 0.375))


def test_dims_larger_than_pointer():
    """Subspaces cannot need more levels than the pointer has."""
    with pytest.raises(DimensionError):
        greedy_partition([0.5, 0.5], [2, 1])


def test_pointer_spec_and_partition():
    """PointerSpec validates itself and feeds the greedy assignment."""
    spec = PointerSpec(energies=(0.0, 1.0), beta=1.0, subspace_dims=(1, 1))
    part = pointer_partition(spec)
    assert part.avector[0] == pytest.approx(1 / (1 + np.exp(-1)))
    with pytest.raises(DimensionError):
        PointerSpec(energies=(0.0, 1.0), beta=1.0, subspace_dims=(2, 1))
    with pytest.raises(DomainError):
        PointerSpec(energies=(), beta=1.0, subspace_dims=(1,))


def test_read_energies(tmp_path):
    """One energy per line, comments and blank lines skipped."""
    path = tmp_path / "levels.txt"
    path.write_text("# pointer levels\n0.0\n\n1.5\n2.0  # top\n")
    assert list(read_energies(path)) == [0.0, 1.5, 2.0]


def test_read_energies_errors(tmp_path):
    """Missing files are I/O errors, malformed ones domain errors."""
    with pytest.raises(OutputError):
        read_energies(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("0.0\nabc\n")
    with pytest.raises(DomainError):
        read_energies(bad)


def _integer_partitions(total, largest=None):
    largest = total if largest is None else largest
    if total == 0:
        yield ()
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _integer_partitions(total - first, first):
            yield (first,) + rest


def _assignments(levels, dims):
    """Every way of placing ``levels`` into subspaces of the given sizes."""
    if not dims:
        yield ()
        return
    for chosen in itertools.combinations(levels, dims[0]):
        remaining = [i for i in levels if i not in chosen]
        for rest in _assignments(remaining, dims[1:]):
            yield (chosen,) + rest


@pytest.mark.parametrize("size", range(2, 9))
def test_greedy_majorizes_every_assignment(size):
    """Sorted greedy traces dominate every other full cover, prefix by prefix."""
    rng = np.random.default_rng(100 + size)
    w = rng.dirichlet(np.ones(size))
    for dims in _integer_partitions(size):
        greedy = np.sort(greedy_partition(w, dims).avector)[::-1]
        greedy_prefix = np.cumsum(greedy)
        best_agreement = {n: float(np.sum(greedy**n)) for n in (2, 3)}
        for groups in _assignments(list(range(size)), dims):
            other = np.sort([w[list(g)].sum() for g in groups])[::-1]
            assert np.all(greedy_prefix >= np.cumsum(other) - 1e-12)
            # lexicographic: first differing entry favours greedy
            diff = greedy - other
            nonzero = np.flatnonzero(np.abs(diff) > 1e-12)
            assert nonzero.size == 0 or diff[nonzero[0]] > 0
            for n, best in best_agreement.items():
                assert best >= float(np.sum(other**n)) - 1e-12


def test_greedy_ignores_level_order():
    """Shuffling the levels permutes the assignment and leaves a_x unchanged."""
    rng = np.random.default_rng(17)
    for _ in range(1000):
        size = int(rng.integers(2, 9))
        w = rng.dirichlet(np.ones(size))
        dims = list(next(iter(_integer_partitions(size, int(rng.integers(1, size + 1))))))
        rng.shuffle(dims)
        perm = rng.permutation(size)
        base = greedy_partition(w, dims)
        shuffled = greedy_partition(w[perm], dims)
        assert shuffled.avector == base.avector
        for x, levels in shuffled.assignment.items():
            assert {int(perm[i]) for i in levels} == set(base.assignment[x])

import math

import numpy as np
import pytest

from renyicap import objective as obj
from renyicap.channel import gen_commuting_channel, gen_noiseless_channel, gen_random_channel, prepare
from renyicap.oracle import (
    GridSpec,
    classical_renyi_capacity,
    fd_gradient,
    fd_hessian_form,
    grid_discretization_bound,
    grid_search_min,
    petz_renyi_divergence,
    sibson_check,
    simplex_grid,
)

from conftest import bsc


def test_fd_gradient_noiseless(noiseless2):
    np.testing.assert_allclose(fd_gradient(noiseless2, np.array([0.5, 0.5]), 1e-5), [1, 1], atol=1e-6)


def test_fd_gradient_symmetric():
    pc = prepare(gen_noiseless_channel(4), 0.3)
    g = fd_gradient(pc, np.full(4, 0.25))
    np.testing.assert_allclose(g, g[0], atol=1e-8)


def test_fd_hessian(noiseless2):
    p = np.array([0.5, 0.5])
    assert fd_hessian_form(noiseless2, p, np.zeros(2)) == 0
    assert fd_hessian_form(noiseless2, p, np.array([1.0, -1.0]), 1e-4) == pytest.approx(4, rel=1e-6)


def test_simplex_grid_counts():
    for n, r in ((1, 5), (2, 5), (3, 4), (4, 3)):
        pts = simplex_grid(GridSpec(r, n))
        assert len(pts) == GridSpec(r, n).num_points == math.comb(r + n - 1, n - 1)
        np.testing.assert_allclose(pts.sum(axis=1), 1)
        assert len({tuple(np.round(x * r).astype(int)) for x in pts}) == len(pts)


def test_grid_limits():
    with pytest.raises(ValueError):
        simplex_grid(GridSpec(10, 5))
    with pytest.raises(ValueError):
        simplex_grid(GridSpec(10**5, 4))


def test_grid_noiseless(noiseless2):
    p, s = grid_search_min(noiseless2, 1000)
    np.testing.assert_allclose(p, [0.5, 0.5])
    assert s == pytest.approx(0.5, abs=1e-6)


def test_grid_single_letter():
    p, s = grid_search_min(prepare(gen_noiseless_channel(1), 0.5), 10)
    assert p.tolist() == [1.0] and s == pytest.approx(1)


def test_grid_bsc_matches_classical():
    pc = prepare(gen_commuting_channel(bsc(0.1)), 0.5)
    _, s = grid_search_min(pc, 2000)
    assert obj.capacity_from_S(0.5, s) == pytest.approx(classical_renyi_capacity(bsc(0.1), 0.5, 2000), abs=1e-6)


def test_grid_bound_holds(random_channel):
    pc = prepare(gen_random_channel(3, 3, 1e-2, 0), 0.5)
    _, fine = grid_search_min(pc, 2000)
    _, coarse = grid_search_min(pc, 20)
    assert 0 <= coarse - fine <= grid_discretization_bound(pc, 20)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_classical_identity(alpha):
    assert classical_renyi_capacity(np.eye(2), alpha, 200) == pytest.approx(math.log(2), abs=1e-12)


def test_classical_identical_rows():
    assert classical_renyi_capacity([[0.3, 0.7], [0.3, 0.7]], 0.5, 100) == pytest.approx(0, abs=1e-12)


def test_classical_rejects_non_stochastic():
    with pytest.raises(ValueError):
        classical_renyi_capacity([[0.5, 0.6], [0.5, 0.5]], 0.5)


def test_petz_divergence_values():
    half = np.eye(2) / 2
    assert petz_renyi_divergence(half, half, 0.5) == pytest.approx(0, abs=1e-14)
    assert petz_renyi_divergence(np.diag([1.0, 0.0]), half, 0.5) == pytest.approx(math.log(2))


def test_petz_divergence_commuting():
    a, r, s = 0.3, np.array([0.2, 0.8]), np.array([0.6, 0.4])
    classical = math.log(np.sum(r**a * s ** (1 - a))) / (a - 1)
    assert petz_renyi_divergence(np.diag(r), np.diag(s), a) == pytest.approx(classical, rel=1e-12)


def test_sibson_noiseless(noiseless2):
    at_opt, others = sibson_check(noiseless2, np.array([0.5, 0.5]), 10)
    assert at_opt == pytest.approx(math.log(2), abs=1e-12)
    assert np.all(others >= at_opt - 1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_sibson_random(seed):
    pc = prepare(gen_random_channel(5, 3, 1e-2, seed), 0.6)
    p = np.random.default_rng(seed).dirichlet(np.ones(5))
    at_opt, others = sibson_check(pc, p, 50, seed)
    assert at_opt == pytest.approx(obj.capacity_from_S(0.6, obj.objective_S(pc, p)), abs=1e-9)
    assert np.all(others >= at_opt - 1e-9)

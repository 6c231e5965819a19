import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyicap import objective as obj
from renyicap.channel import CqChannel, gen_noiseless_channel, gen_random_channel, prepare
from renyicap.oracle import fd_gradient, fd_hessian_form
from renyicap.spectral import SpectralError

from conftest import interior, tangent


def test_mix_noiseless(noiseless2):
    np.testing.assert_allclose(obj.mix(noiseless2, [0.5, 0.5]), np.diag([0.5, 0.5]))


def test_mix_vertex(random_channel):
    pc = prepare(random_channel, 0.3)
    e = np.zeros(10)
    e[4] = 1
    np.testing.assert_allclose(obj.mix(pc, e), pc.powers[4], atol=1e-15)


def test_mix_rejects_wrong_length(noiseless2):
    with pytest.raises(ValueError):
        obj.mix(noiseless2, [1.0, 0.0, 0.0])


def test_S_noiseless_uniform(noiseless2):
    assert obj.objective_S(noiseless2, [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_S_at_vertex_is_one(random_channel, alpha):
    pc = prepare(random_channel, alpha)
    for x in range(pc.n):
        e = np.zeros(pc.n)
        e[x] = 1
        assert obj.objective_S(pc, e) == pytest.approx(1, abs=1e-10)


def test_capacity_from_S():
    assert obj.capacity_from_S(0.3, 1.0) == 0
    assert obj.capacity_from_S(0.5, 0.5) == pytest.approx(math.log(2))
    for n in (2, 3, 4):
        assert obj.capacity_from_S(0.5, 1 / n) == pytest.approx(math.log(n))
    with pytest.raises(ValueError):
        obj.capacity_from_S(0.5, 0.0)


def test_gradient_noiseless(noiseless2):
    np.testing.assert_allclose(obj.gradient(noiseless2, [0.5, 0.5]), [1, 1], atol=1e-14)


def test_gradient_symmetric_channel():
    ch = CqChannel(np.stack([np.eye(3) / 3] * 4))
    g = obj.gradient(prepare(ch, 0.4), np.array([0.1, 0.2, 0.3, 0.4]))
    np.testing.assert_allclose(g, g[0], rtol=1e-12)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.8])
def test_gradient_matches_fd(seed, alpha):
    pc = prepare(gen_random_channel(10, 6, 1e-2, seed), alpha)
    p = interior(np.random.default_rng(seed), pc.n, 0.02)
    g = obj.gradient(pc, p)
    fd = fd_gradient(pc, p, 1e-5)
    assert np.abs(g - fd).max() / np.abs(fd).max() <= 1e-6


def test_gradient_strict_below_two():
    pc = prepare(gen_noiseless_channel(2), 0.8)
    with pytest.raises(SpectralError):
        obj.gradient(pc, [1.0, 0.0])
    # beta >= 2: singular M is fine
    pc = prepare(gen_noiseless_channel(2), 0.5)
    np.testing.assert_allclose(obj.gradient(pc, [1.0, 0.0]), [2, 0], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.2, 0.4, 0.6, 0.9]))
def test_euler_identity(seed, alpha):
    # S is homogeneous of degree beta in p
    pc = prepare(gen_random_channel(4, 3, 1e-2, seed % 100), alpha)
    p = interior(np.random.default_rng(seed), 4, 0.01)
    s, g = obj.value_and_gradient(pc, p)
    assert p @ g == pytest.approx(pc.beta * s, rel=1e-10)


def test_hessian_zero_direction(noiseless2):
    assert obj.hessian_quadratic_form(noiseless2, [0.5, 0.5], [0.0, 0.0]) == 0


def test_hessian_noiseless(noiseless2):
    assert obj.hessian_quadratic_form(noiseless2, [0.5, 0.5], [1.0, -1.0]) == pytest.approx(4)


def test_hessian_requires_tangent(noiseless2):
    with pytest.raises(ValueError, match="sum to zero"):
        obj.hessian_quadratic_form(noiseless2, [0.5, 0.5], [1.0, 1.0])


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.8])
def test_hessian_matches_fd(seed, alpha):
    pc = prepare(gen_random_channel(10, 6, 1e-2, seed), alpha)
    rng = np.random.default_rng(100 + seed)
    p = interior(rng, pc.n, 0.02)
    h = tangent(rng, pc.n)
    h /= np.abs(h).max()
    exact = obj.hessian_quadratic_form(pc, p, h)
    assert exact > 0
    assert abs(exact - fd_hessian_form(pc, p, h, 1e-4)) / exact <= 1e-4


@given(st.floats(1.01, 6.0))
def test_divided_difference_diagonal(beta):
    assert obj.divided_difference_g(1.0, 1.0, beta) == pytest.approx(beta - 1)


@given(st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_divided_difference_linear_case(a, b):
    assert obj.divided_difference_g(a, b, 2.0) == pytest.approx(1.0, rel=1e-12)


def test_divided_difference_hand_value():
    assert obj.divided_difference_g(4.0, 1.0, 3.0) == pytest.approx(5.0, rel=1e-14)


def test_divided_difference_symmetric_and_continuous():
    beta = 2.7
    assert obj.divided_difference_g(0.3, 0.7, beta) == pytest.approx(obj.divided_difference_g(0.7, 0.3, beta))
    # across the switch threshold the two branches agree
    lo = obj.divided_difference_g(0.5, 0.5 + 0.5e-7, beta)
    hi = obj.divided_difference_g(0.5, 0.5 + 2e-7, beta)
    assert lo == pytest.approx(hi, rel=1e-6)


def test_divided_difference_rejects_nonpositive():
    with pytest.raises(SpectralError):
        obj.divided_difference_g(0.0, 1.0, 2.5)


@settings(max_examples=200)
@given(st.floats(1e-6, 1), st.floats(1e-6, 1), st.sampled_from([1.25, 1.5, 2.0, 2.5, 3.0, 4.0]))
def test_kernel_bounds(li, lj, beta):
    g = obj.divided_difference_g(li, lj, beta)
    upper = (beta - 1) * obj.c_beta(beta) * (li ** (beta - 2) + lj ** (beta - 2))
    edge = min(li, lj) if beta >= 2 else max(li, lj)
    lower = (beta - 1) * edge ** (beta - 2)
    assert g <= upper * (1 + 1e-12)
    assert g >= lower * (1 - 1e-12)


def test_c_beta():
    assert obj.c_beta(2.0) == 0.5
    assert obj.c_beta(2.5) == pytest.approx(0.70711, abs=1e-5)
    assert obj.c_beta(3.0) == 0.5
    assert obj.c_beta(1.5) == 0.5
    with pytest.raises(ValueError):
        obj.c_beta(1.0)


def test_smoothness_constants():
    assert obj.smoothness_L(prepare(gen_noiseless_channel(2), 0.5)) == pytest.approx(2)
    assert obj.smoothness_L(prepare(gen_noiseless_channel(2), 0.25)) == pytest.approx(12)


def test_smoothness_needs_delta_below_two():
    pc = prepare(gen_noiseless_channel(2), 0.8)
    with pytest.raises(ValueError, match="delta"):
        obj.smoothness_L(pc)
    beta = pc.beta
    L = obj.smoothness_L(pc, 0.1)
    assert L == pytest.approx(2 * 0.5 * beta * (beta - 1) * 0.1 ** (beta - 2))


def test_delta_range_checked(noiseless2):
    with pytest.raises(ValueError):
        obj.m_delta(noiseless2, 0.6)
    with pytest.raises(ValueError):
        obj.m_delta(noiseless2, 0.0)


def test_local_smoothness_bounded_by_L_delta(random_channel):
    pc = prepare(random_channel, 0.7)
    rng = np.random.default_rng(1)
    delta = 1e-2
    L = obj.smoothness_L(pc, delta)
    for _ in range(20):
        assert obj.local_smoothness(pc, interior(rng, pc.n, delta)) <= L * (1 + 1e-12)


def test_helmert_basis_orthonormal():
    for n in (1, 2, 5):
        q = obj.helmert_basis(n)
        assert q.shape == (n, n - 1)
        np.testing.assert_allclose(q.T @ q, np.eye(n - 1), atol=1e-14)
        np.testing.assert_allclose(q.sum(axis=0), 0, atol=1e-14)


def test_gamma_noiseless():
    pc = prepare(gen_noiseless_channel(3), 0.5)
    np.testing.assert_allclose(obj.gram_matrix(pc), np.eye(3), atol=1e-14)
    assert obj.gram_gamma(pc) == pytest.approx(1)


def test_gamma_duplicated_states():
    base = gen_random_channel(3, 3, 1e-2, 0).states
    ch = CqChannel(np.stack([base[0], base[0], base[1], base[2]]))
    pc = prepare(ch, 0.5)
    assert abs(obj.gram_gamma(pc)) <= 1e-10
    assert obj.strong_convexity_mu(pc, 0.1) == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_gamma_positive_random(seed):
    assert obj.gram_gamma(prepare(gen_random_channel(10, 6, 1e-2, seed), 0.5)) > 0


def test_gamma_single_letter():
    assert obj.gram_gamma(prepare(gen_noiseless_channel(1), 0.5)) == 0


def test_mu_noiseless():
    assert obj.strong_convexity_mu(prepare(gen_noiseless_channel(2), 0.5), 0.1) == pytest.approx(0.2)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.8])
def test_curvature_constants_consistent(random_channel, alpha):
    c = obj.curvature_constants(prepare(random_channel, alpha), 1e-2)
    assert 0 < c.mu <= c.L
    assert set(c.as_dict()) == {"beta", "delta", "c_beta", "L", "m_delta", "gamma", "mu"}

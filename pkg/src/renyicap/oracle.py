"""Independent reference computations used to cross-check the solver.

Nothing here calls the analytic gradient/Hessian or the solver; these only
evaluate ``objective_S`` (or a classical formula) and plain spectral
functions.
"""
from __future__ import annotations

from math import comb
from typing import NamedTuple

import numpy as np

from .channel import PreparedChannel
from .objective import capacity_from_S, mix, objective_S
from .spectral import EIG_FLOOR, SpectralError, eigh, matrix_power, psd_power

MAX_GRID_N = 4
MAX_GRID_POINTS = 10**7


class GridSpec(NamedTuple):
    resolution: int
    alphabet_size: int

    def validate(self) -> None:
        if self.resolution < 1:
            raise ValueError("grid resolution must be >= 1")
        if not 1 <= self.alphabet_size <= MAX_GRID_N:
            raise ValueError(f"grid oracles support 1 <= n <= {MAX_GRID_N}")
        if self.num_points > MAX_GRID_POINTS:
            raise ValueError(f"grid has {self.num_points} points (limit {MAX_GRID_POINTS})")

    @property
    def num_points(self) -> int:
        return comb(self.resolution + self.alphabet_size - 1, self.alphabet_size - 1)


def _tangent_direction(n: int, x: int) -> np.ndarray:
    # coordinate step projected onto sum(h) = 0
    e = np.full(n, -1.0 / n)
    e[x] += 1.0
    return e


def fd_gradient(ch: PreparedChannel, p, step: float = 1e-5) -> np.ndarray:
    """Central differences of S along tangent-projected coordinate directions.

    The result is the gradient up to an additive constant (the component
    normal to the simplex is not observable); it is returned shifted so that
    ``sum_x p_x g_x = beta * S(p)``, matching the homogeneous extension.
    """
    p = np.asarray(p, dtype=float)
    n = p.size
    if n == 1:
        return np.array([ch.beta * objective_S(ch, p)])
    if p.min() <= 2 * step:
        raise ValueError(f"p too close to the boundary for step {step}")
    g = np.empty(n)
    for x in range(n):
        e = _tangent_direction(n, x)
        g[x] = (objective_S(ch, p + step * e) - objective_S(ch, p - step * e)) / (2 * step)
    # g holds projected derivatives; restore the normal part from Euler's identity
    return g - p @ g + ch.beta * objective_S(ch, p)


def fd_hessian_form(ch: PreparedChannel, p, h, step: float = 1e-4) -> float:
    p = np.asarray(p, dtype=float)
    h = np.asarray(h, dtype=float)
    if not np.any(h):
        return 0.0
    if np.any(p - step * np.abs(h) <= 0):
        raise ValueError(f"p too close to the boundary for step {step}")
    s0 = objective_S(ch, p)
    return (objective_S(ch, p + step * h) - 2 * s0 + objective_S(ch, p - step * h)) / step**2


def simplex_grid(grid: GridSpec) -> np.ndarray:
    """All points ``k / resolution`` of the simplex lattice, one per row."""
    grid.validate()
    r, n = grid.resolution, grid.alphabet_size
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        k = np.arange(r + 1)
        pts = np.stack([k, r - k], axis=1)
    elif n == 3:
        i, j = np.triu_indices(r + 1)  # i <= j
        pts = np.stack([i, j - i, r - j], axis=1)
    else:
        rows = []
        for a in range(r + 1):
            i, j = np.triu_indices(r - a + 1)
            rows.append(np.stack([np.full(i.size, a), i, j - i, r - a - j], axis=1))
        pts = np.concatenate(rows)
    return pts / r


def _batched_S(ch: PreparedChannel, pts: np.ndarray, chunk: int = 200_000) -> np.ndarray:
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        m = np.tensordot(pts[lo : lo + chunk], ch.powers, axes=1)
        lam = np.clip(np.linalg.eigvalsh(m), 0.0, None)
        out[lo : lo + chunk] = np.sum(lam**ch.beta, axis=1)
    return out


def grid_search_min(ch: PreparedChannel, grid: GridSpec | int) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of S over the simplex lattice."""
    if isinstance(grid, int):
        grid = GridSpec(grid, ch.n)
    if grid.alphabet_size != ch.n:
        raise ValueError("grid alphabet size does not match the channel")
    pts = simplex_grid(grid)
    vals = _batched_S(ch, pts)
    k = int(np.argmin(vals))
    return pts[k], float(vals[k])


def grid_discretization_bound(ch: PreparedChannel, grid: GridSpec | int) -> float:
    """Upper bound on ``min_grid S - min S``.

    Every simplex point is within l1 distance ``2(n-1)/resolution`` of the
    lattice, and gradient components lie in ``[0, beta]`` (each
    ``Tr[M^(beta-1) A_x] <= 1``), so for zero-sum steps
    ``|S(p) - S(q)| <= beta/2 * ||p - q||_1``. The returned value keeps a
    factor 2 of slack on top of that.
    """
    if isinstance(grid, int):
        grid = GridSpec(grid, ch.n)
    return 2.0 * ch.beta * (grid.alphabet_size - 1) / grid.resolution


def classical_S(P, alpha: float, pts) -> np.ndarray:
    """Diagonal objective ``sum_j (sum_x p_x P[x,j]**alpha)**(1/alpha)`` for each row of pts."""
    P = np.asarray(P, dtype=float)
    inner = np.asarray(pts) @ (P**alpha)
    return np.sum(inner ** (1.0 / alpha), axis=-1)


def classical_renyi_capacity(P, alpha: float, grid: int = 2000) -> float:
    """Grid-minimised capacity of a classical channel with transition rows ``P``."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-10):
        raise ValueError("P must be row-stochastic")
    pts = simplex_grid(GridSpec(grid, P.shape[0]))
    best = np.inf
    for lo in range(0, len(pts), 500_000):
        best = min(best, float(classical_S(P, alpha, pts[lo : lo + 500_000]).min()))
    return capacity_from_S(alpha, best)


def petz_renyi_divergence(rho, sigma, alpha: float) -> float:
    """``log Tr[rho**alpha sigma**(1-alpha)] / (alpha - 1)`` for full-rank ``sigma``.

    Zero eigenvalues of ``rho`` contribute nothing.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if eigh(sigma).eigenvalues[0] <= EIG_FLOOR:
        raise SpectralError("sigma must be positive definite")
    rho_a = psd_power(rho, alpha)
    sigma_b = matrix_power(sigma, 1.0 - alpha)
    q = float(np.sum(rho_a * sigma_b.T).real)
    return float(np.log(q) / (alpha - 1.0))


def sibson_objective(ch: PreparedChannel, p, sigma) -> float:
    """``log(sum_x p_x exp((alpha-1) D_alpha(W_x || sigma))) / (alpha-1)``."""
    a = ch.alpha
    terms = [
        px * np.exp((a - 1.0) * petz_renyi_divergence(w, sigma, a))
        for px, w in zip(p, ch.base.states)
        if px > 0
    ]
    return float(np.log(np.sum(terms)) / (a - 1.0))


def random_density(d: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def sibson_check(ch: PreparedChannel, p, num_random: int = 50, seed: int = 0):
    """Value of the Sibson expression at ``sigma* = M^beta / S`` and at random states.

    The caller compares the first against ``alpha/(alpha-1) log S(p)`` and
    checks that none of the random values falls below it.
    """
    p = np.asarray(p, dtype=float)
    sigma_star = psd_power(mix(ch, p), ch.beta)
    sigma_star /= np.trace(sigma_star).real
    at_opt = sibson_objective(ch, p, sigma_star)
    rng = np.random.default_rng(seed)
    others = np.array(
        [sibson_objective(ch, p, random_density(ch.dim, rng)) for _ in range(num_random)]
    )
    return at_opt, others

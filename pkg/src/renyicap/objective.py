"""Trace-power objective ``S(p) = Tr[M(p)**beta]`` and its curvature.

``M(p) = sum_x p_x A_x`` with ``A_x = W_x**alpha`` and ``beta = 1/alpha``.
Minimising ``S`` over the simplex gives the Petz-Renyi capacity through
``C = alpha/(alpha-1) * log(min S)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PreparedChannel
from .spectral import EIG_FLOOR, SpectralError, apply_spectral, eigh

# relative eigenvalue gap below which the divided difference uses its
# midpoint-derivative form
DD_SWITCH = 1e-7


def as_prob(p, n: int | None = None) -> np.ndarray:
    """Validate and renormalise a probability vector."""
    p = np.asarray(p, dtype=float).ravel()
    if n is not None and p.size != n:
        raise ValueError(f"probability vector has length {p.size}, expected {n}")
    if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and nonnegative")
    total = p.sum()
    if total <= 0:
        raise ValueError("probabilities sum to zero")
    return p / total


def as_tangent(h, n: int | None = None) -> np.ndarray:
    h = np.asarray(h, dtype=float).ravel()
    if n is not None and h.size != n:
        raise ValueError(f"tangent vector has length {h.size}, expected {n}")
    if abs(h.sum()) > 1e-12 * max(1.0, np.abs(h).sum()):
        raise ValueError(f"tangent vector must sum to zero (sum={h.sum():.3g})")
    return h


def mix(ch: PreparedChannel, p) -> np.ndarray:
    """``M(p) = sum_x p_x A_x``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (ch.n,):
        raise ValueError(f"probability vector has length {p.size}, expected {ch.n}")
    m = np.tensordot(p, ch.powers, axes=1)
    return 0.5 * (m + m.conj().T)


def _spectrum(ch, p, strict: bool):
    dec = eigh(mix(ch, p))
    lam = dec.eigenvalues
    if strict and lam[0] <= EIG_FLOOR:
        raise SpectralError(
            f"M(p) must be positive definite here; lambda_min = {lam[0]:.3g}"
        )
    return dec, np.clip(lam, 0.0, None)


def objective_S(ch: PreparedChannel, p) -> float:
    lam = np.clip(np.linalg.eigvalsh(mix(ch, p)), 0.0, None)
    return float(np.sum(lam**ch.beta))


def capacity_from_S(alpha: float, s_min: float) -> float:
    """Capacity in nats from the minimal objective value."""
    if s_min <= 0:
        raise ValueError(f"objective value must be positive, got {s_min}")
    # S <= 1 in exact arithmetic; clamp round-off so capacity stays >= 0
    return float(alpha / (alpha - 1.0) * np.log(min(s_min, 1.0)))


def _grad_from_spectrum(ch, dec, lam):
    mpow = apply_spectral(dec, lam ** (ch.beta - 1.0))
    # Tr[M^{beta-1} A_x] for every x
    return ch.beta * np.einsum("ij,xji->x", mpow, ch.powers).real


def gradient(ch: PreparedChannel, p) -> np.ndarray:
    """``[grad S]_x = beta Tr[M(p)**(beta-1) A_x]``.

    For ``beta >= 2`` a singular ``M(p)`` is fine; otherwise ``M(p)`` must
    be positive definite.
    """
    dec, lam = _spectrum(ch, p, strict=ch.beta < 2)
    return _grad_from_spectrum(ch, dec, lam)


def value_and_gradient(ch: PreparedChannel, p) -> tuple[float, np.ndarray]:
    dec, lam = _spectrum(ch, p, strict=ch.beta < 2)
    return float(np.sum(lam**ch.beta)), _grad_from_spectrum(ch, dec, lam)


def divided_difference_g(lam_i, lam_j, beta: float):
    """Divided difference of ``t -> t**(beta-1)`` (works elementwise).

    Nearly equal pairs switch to ``(beta-1) * mid**(beta-2)``, the
    continuous extension at the diagonal.
    """
    li = np.asarray(lam_i, dtype=float)
    lj = np.asarray(lam_j, dtype=float)
    if np.any(li <= 0) or np.any(lj <= 0):
        raise SpectralError("divided difference needs strictly positive eigenvalues")
    li, lj = np.broadcast_arrays(li, lj)
    gap = li - lj
    close = np.abs(gap) <= DD_SWITCH * np.maximum(np.maximum(li, lj), 1.0)
    safe_gap = np.where(close, 1.0, gap)
    # a^k - b^k = b^k expm1(k log1p((a-b)/b)) keeps full relative accuracy
    # for nearby eigenvalues, where the plain quotient loses digits
    k = beta - 1.0
    quotient = lj**k * np.expm1(k * np.log1p(gap / lj)) / safe_gap
    midpoint = (beta - 1.0) * (0.5 * (li + lj)) ** (beta - 2.0)
    g = np.where(close, midpoint, quotient)
    return g if g.ndim else float(g)


def hessian_quadratic_form(ch: PreparedChannel, p, h) -> float:
    """Second directional derivative ``D^2 S[p](h, h)``.

    Evaluated in the eigenbasis of ``M(p)`` as
    ``beta * sum_ij g_ij |H_ij|^2`` with ``H = U^H (sum_x h_x A_x) U``.
    """
    h = as_tangent(h, ch.n)
    dec, lam = _spectrum(ch, p, strict=True)
    u = dec.eigenvectors
    hop = np.tensordot(h, ch.powers, axes=1)
    ht = u.conj().T @ hop @ u
    g = divided_difference_g(lam[:, None], lam[None, :], ch.beta)
    return float(ch.beta * np.sum(g * np.abs(ht) ** 2))


# -- curvature constants ----------------------------------------------------

def c_beta(beta: float) -> float:
    if beta <= 1:
        raise ValueError(f"c_beta needs beta > 1, got {beta}")
    if 2.0 < beta < 3.0:
        return 2.0 ** (2.0 - beta)
    return 0.5


def _check_delta(ch: PreparedChannel, delta: float) -> None:
    if not 0.0 < delta <= 1.0 / ch.n * (1 + 1e-12):
        raise ValueError(f"delta must lie in (0, 1/n] = (0, {1.0 / ch.n:.6g}], got {delta}")


def m_delta(ch: PreparedChannel, delta: float) -> float:
    """Spectral floor ``delta * lambda_min(sum_x A_x)`` of ``M`` on the truncated simplex."""
    _check_delta(ch, delta)
    return delta * ch.a_sum_min_eig


def smoothness_L(ch: PreparedChannel, delta: float | None = None) -> float:
    """Relative smoothness constant w.r.t. negative entropy.

    Global for ``beta >= 2``; for ``1 < beta < 2`` it holds on the truncated
    simplex with floor ``delta``, which is then required.
    """
    beta = ch.beta
    base = 2.0 * c_beta(beta) * beta * (beta - 1.0)
    if beta >= 2.0:
        if delta is not None:
            _check_delta(ch, delta)
        return base
    if delta is None:
        raise ValueError("beta < 2 needs a truncation level delta for L")
    return base * m_delta(ch, delta) ** (beta - 2.0)


def local_smoothness(ch: PreparedChannel, p) -> float:
    """Pointwise constant ``L(p)``; uses ``lambda_min(M(p))`` when ``beta < 2``."""
    beta = ch.beta
    base = 2.0 * c_beta(beta) * beta * (beta - 1.0)
    if beta >= 2.0:
        return base
    lam_min = np.linalg.eigvalsh(mix(ch, p))[0]
    if lam_min <= EIG_FLOOR:
        raise SpectralError(f"M(p) singular (lambda_min={lam_min:.3g})")
    return base * lam_min ** (beta - 2.0)


def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal basis (as columns) of the zero-sum subspace of R^n."""
    basis = np.zeros((n, max(n - 1, 0)))
    for k in range(1, n):
        basis[:k, k - 1] = 1.0
        basis[k, k - 1] = -k
        basis[:, k - 1] /= np.sqrt(k * (k + 1))
    return basis


def gram_matrix(ch: PreparedChannel) -> np.ndarray:
    a = ch.powers
    return np.einsum("xij,yji->xy", a, a).real


def gram_gamma(ch: PreparedChannel) -> float:
    """Smallest eigenvalue of the Gram matrix ``Tr[A_x A_y]`` on zero-sum directions."""
    if ch.n == 1:
        # tangent space is {0}: report 0 so no linear rate is claimed
        return 0.0
    q = helmert_basis(ch.n)
    return float(np.linalg.eigvalsh(q.T @ gram_matrix(ch) @ q)[0])


def strong_convexity_mu(ch: PreparedChannel, delta: float) -> float:
    """Relative strong convexity constant on the truncated simplex."""
    _check_delta(ch, delta)
    beta = ch.beta
    gamma = max(gram_gamma(ch), 0.0)
    if beta <= 2.0:
        return beta * (beta - 1.0) * gamma * delta
    return beta * (beta - 1.0) * m_delta(ch, delta) ** (beta - 2.0) * gamma * delta


@dataclass(frozen=True)
class CurvatureConstants:
    beta: float
    delta: float
    c_beta: float
    L: float
    m_delta: float
    gamma: float
    mu: float

    def __post_init__(self):
        if self.mu > self.L * (1 + 1e-12):
            raise ValueError(f"inconsistent constants: mu={self.mu} > L={self.L}")

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "delta": self.delta,
            "c_beta": self.c_beta,
            "L": self.L,
            "m_delta": self.m_delta,
            "gamma": self.gamma,
            "mu": self.mu,
        }


def curvature_constants(ch: PreparedChannel, delta: float) -> CurvatureConstants:
    return CurvatureConstants(
        beta=ch.beta,
        delta=delta,
        c_beta=c_beta(ch.beta),
        L=smoothness_L(ch, delta),
        m_delta=m_delta(ch, delta),
        gamma=gram_gamma(ch),
        mu=strong_convexity_mu(ch, delta),
    )

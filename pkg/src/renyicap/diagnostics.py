"""Duality gap certificate and KL divergence."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .objective import gradient


class GapReport(NamedTuple):
    gap: float
    inner_product: float
    min_grad: float
    argmin_x: int


def gap_from_gradient(p, grad) -> GapReport:
    p = np.asarray(p, dtype=float)
    grad = np.asarray(grad, dtype=float)
    inner = float(p @ grad)
    x = int(np.argmin(grad))
    return GapReport(inner - float(grad[x]), inner, float(grad[x]), x)


def duality_gap(ch, p) -> GapReport:
    """Frank-Wolfe gap ``max_q <grad S(p), p - q> = <grad, p> - min_x grad_x``.

    By convexity it upper-bounds ``S(p) - min S``.
    """
    return gap_from_gradient(p, gradient(ch, p))


def _kl_kernel(x):
    """``(1 + x) log(1 + x) - x`` for ``x >= -1``, accurate for small ``|x|``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    xs = np.where(small, x, 0.0)
    # series sum_k (-1)^k x^k / (k (k-1)), k >= 2
    series = xs**2 * (0.5 - xs / 6 + xs**2 / 12 - xs**3 / 20)
    xl = np.where(small, 1.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.where(xl == -1.0, 1.0, (1 + xl) * np.log1p(xl) - xl)
    return np.where(small, series, direct)


def kl_divergence(p, r) -> float:
    """``sum_x p_x log(p_x / r_x)`` in nats, with ``0 log 0 = 0``.

    Returns ``inf`` when ``p`` puts mass where ``r`` has none.
    """
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    if p.shape != r.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {r.shape}")
    if np.any(r[p > 0] <= 0):
        return float("inf")
    pos = r > 0
    # each term r f((p - r)/r) = p log(p/r) - p + r is >= 0; the sum of the
    # added (r - p) is zero on the simplex. The kernel form keeps full
    # relative accuracy when p and r nearly coincide.
    return float(np.sum(r[pos] * _kl_kernel(p[pos] / r[pos] - 1.0)))

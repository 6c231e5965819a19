"""Property suite behind ``renyicap verify``.

Each check samples random channels/points and tests one inequality or
identity at a fixed tolerance. Checks return a :class:`CheckResult`; the
suite never raises on a failed property.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import objective as obj
from .channel import CqChannel, gen_noiseless_channel, gen_random_channel, prepare
from .diagnostics import duality_gap, kl_divergence
from .oracle import fd_gradient, fd_hessian_form, sibson_check
from .solver import exp_update
from .spectral import eigh, frobenius_norm_sq, matrix_power, trace_product

ALPHAS = (0.25, 0.5, 0.8)
KERNEL_BETAS = (1.25, 1.5, 2.0, 2.5, 3.0, 4.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float = 0.0
    detail: str = ""
    seconds: float = 0.0


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def interior_point(rng, n: int, delta: float = 0.0) -> np.ndarray:
    q = rng.dirichlet(np.ones(n))
    return (1 - n * delta) * q + delta


def tangent(rng, n: int) -> np.ndarray:
    h = rng.standard_normal(n)
    return h - h.mean()


# -- individual properties --------------------------------------------------

def check_spectral(rng, dims=(2, 4, 6), samples=20) -> float:
    worst = 0.0
    for d in dims:
        for _ in range(samples):
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            a = g + g.conj().T
            dec = eigh(a)
            u = dec.eigenvectors
            psd = g @ g.conj().T + 1e-3 * np.eye(d)
            comp = matrix_power(matrix_power(psd, 0.5), 2.0)
            worst = max(
                worst,
                np.linalg.norm(dec.reconstruct() - a),
                np.linalg.norm(u.conj().T @ u - np.eye(d)),
                np.linalg.norm(comp - psd) / np.linalg.norm(psd),
                abs(frobenius_norm_sq(a) - trace_product(a, a)) / frobenius_norm_sq(a),
            )
    return worst


def check_channel(ch: CqChannel) -> float:
    worst = 0.0
    for w in ch.states:
        worst = max(
            worst,
            np.abs(w - w.conj().T).max(),
            -np.linalg.eigvalsh(w)[0],
            abs(np.trace(w).real - 1),
        )
    return worst


def check_gradient(ch, rng, alphas=ALPHAS, points=2) -> float:
    worst = 0.0
    for a in alphas:
        pc = prepare(ch, a)
        for _ in range(points):
            p = interior_point(rng, pc.n, 0.2 / pc.n)
            g = obj.gradient(pc, p)
            fd = fd_gradient(pc, p, 1e-5)
            worst = max(worst, np.abs(g - fd).max() / np.abs(fd).max())
    return worst


def check_hessian(ch, rng, alphas=ALPHAS, points=2, dirs=3) -> float:
    worst = 0.0
    for a in alphas:
        pc = prepare(ch, a)
        for _ in range(points):
            p = interior_point(rng, pc.n, 0.2 / pc.n)
            for _ in range(dirs):
                h = tangent(rng, pc.n)
                h /= np.abs(h).max()
                exact = obj.hessian_quadratic_form(pc, p, h)
                fd = fd_hessian_form(pc, p, h, 1e-4)
                # FD round-off is ~1e-7 absolute; directions near the kernel
                # (degenerate channels) are compared on that absolute scale
                worst = max(worst, abs(exact - fd) / max(abs(exact), 1e-2))
    return worst


def kernel_bound_violation(samples: int, rng) -> float:
    """Largest violation of the divided-difference upper/lower bounds."""
    li = rng.uniform(0, 1, samples)
    lj = rng.uniform(0, 1, samples)
    li[li == 0] = 0.5
    lj[lj == 0] = 0.5
    worst = -np.inf
    for beta in KERNEL_BETAS:
        g = obj.divided_difference_g(li, lj, beta)
        upper = (beta - 1) * obj.c_beta(beta) * (li ** (beta - 2) + lj ** (beta - 2))
        if beta >= 2:
            lower = (beta - 1) * np.minimum(li, lj) ** (beta - 2)
        else:
            lower = (beta - 1) * np.maximum(li, lj) ** (beta - 2)
        worst = max(worst, float(np.max(g - upper)), float(np.max(lower - g)))
    return worst


def smoothness_violation(pc, rng, pairs: int, delta: float) -> float:
    """Largest ``S(p') - [S(p) + <grad, p'-p> + L KL(p'||p)]`` over sampled pairs in the truncated simplex."""
    L = obj.smoothness_L(pc, delta)
    worst = -np.inf
    for _ in range(pairs):
        p = interior_point(rng, pc.n, delta)
        q = interior_point(rng, pc.n, delta)
        s, g = obj.value_and_gradient(pc, p)
        rhs = s + g @ (q - p) + L * kl_divergence(q, p)
        worst = max(worst, obj.objective_S(pc, q) - rhs)
    return worst


def hessian_sandwich_violation(pc, rng, points: int, delta: float) -> float:
    """Hessian against ``L(p) sum h^2/p`` from above and ``mu sum h^2/p`` from below."""
    mu = obj.strong_convexity_mu(pc, delta)
    worst = -np.inf
    for _ in range(points):
        p = interior_point(rng, pc.n, delta)
        h = tangent(rng, pc.n)
        hess = obj.hessian_quadratic_form(pc, p, h)
        metric = np.sum(h**2 / p)
        upper = obj.local_smoothness(pc, p) * metric
        worst = max(worst, (hess - upper) / max(1.0, upper), mu * metric - hess)
    return worst


def convexity_violation(pc, rng, pairs: int) -> float:
    worst = -np.inf
    for _ in range(pairs):
        p = interior_point(rng, pc.n)
        q = interior_point(rng, pc.n)
        mid = obj.objective_S(pc, 0.5 * (p + q))
        worst = max(worst, mid - 0.5 * (obj.objective_S(pc, p) + obj.objective_S(pc, q)))
    return worst


def euler_violation(pc, rng, points: int) -> float:
    worst = 0.0
    for _ in range(points):
        p = interior_point(rng, pc.n, 0.1 / pc.n)
        s, g = obj.value_and_gradient(pc, p)
        worst = max(worst, abs(p @ g - pc.beta * s))
    return worst


def gap_violation(pc, rng, points: int) -> float:
    worst = -np.inf
    for _ in range(points):
        worst = max(worst, -duality_gap(pc, interior_point(rng, pc.n, 0.1 / pc.n)).gap)
    return worst


def descent_violation(pc, iters: int) -> float:
    """Largest pre-safeguard increase of S along constant-step iterates (beta >= 2)."""
    eta = 1.0 / obj.smoothness_L(pc)
    p = np.full(pc.n, 1.0 / pc.n)
    p[0] *= 3
    p /= p.sum()
    worst = -np.inf
    for _ in range(iters):
        s, g = obj.value_and_gradient(pc, p)
        q = exp_update(p, g, eta)
        worst = max(worst, obj.objective_S(pc, q) - s)
        p = q
    return worst


def sibson_violation(pc, rng, samples: int) -> float:
    worst = 0.0
    for _ in range(3):
        p = interior_point(rng, pc.n, 0.1 / pc.n)
        at_opt, others = sibson_check(pc, p, samples, seed=int(rng.integers(2**31)))
        target = obj.capacity_from_S(pc.alpha, obj.objective_S(pc, p))
        worst = max(worst, abs(at_opt - target), float(np.max(at_opt - others)))
    return worst


# -- the suite --------------------------------------------------------------

def _run(report: Report, name: str, fn, tol: float):
    t0 = time.perf_counter()
    try:
        worst = float(fn())
        ok = worst <= tol
        detail = f"worst={worst:.3e} tol={tol:.0e}"
    except Exception as exc:  # a crashing property counts as failed
        worst, ok, detail = float("nan"), False, f"{type(exc).__name__}: {exc}"
    report.checks.append(CheckResult(name, ok, worst, detail, time.perf_counter() - t0))


def run_suite(seeds: int = 2, sizes=((4, 3), (10, 6)), extra: CqChannel | None = None,
              samples: int = 200) -> Report:
    """Run every property on ``seeds`` random channels of each ``(n, d)`` size.

    ``extra`` is included as an additional instance (e.g. a user-supplied
    file); degenerate channels with ``gamma = 0`` are fine and simply give
    ``mu = 0``.
    """
    rng = np.random.default_rng(12345)
    report = Report()
    _run(report, "spectral: reconstruction/unitarity/power composition", lambda: check_spectral(rng), 1e-9)
    _run(report, "kernel: divided-difference upper/lower bounds", lambda: kernel_bound_violation(10**4, rng), 1e-12)

    channels = [(f"random n={n} d={d} seed={s}", gen_random_channel(n, d, 1e-2, s))
                for n, d in sizes for s in range(seeds)]
    channels.append(("noiseless n=3", gen_noiseless_channel(3)))
    if extra is not None:
        channels.append(("supplied channel", extra))

    for label, ch in channels:
        _run(report, f"{label}: state validity", lambda: check_channel(ch), 1e-10)
        n = ch.alphabet_size
        if n == 1:
            continue
        _run(report, f"{label}: gradient vs finite differences", lambda: check_gradient(ch, rng), 1e-6)
        _run(report, f"{label}: Hessian vs finite differences", lambda: check_hessian(ch, rng), 1e-4)
        delta = min(1e-2, 1.0 / n)
        for a in ALPHAS:
            pc = prepare(ch, a)
            _run(report, f"{label} alpha={a}: relative smoothness (Bregman)",
                 lambda: smoothness_violation(pc, rng, samples, delta), 1e-10)
            _run(report, f"{label} alpha={a}: Hessian between mu and L(p) metrics",
                 lambda: hessian_sandwich_violation(pc, rng, samples // 4, delta), 1e-10)
            _run(report, f"{label} alpha={a}: convexity (midpoint)",
                 lambda: convexity_violation(pc, rng, samples // 4), 1e-12)
            _run(report, f"{label} alpha={a}: Euler identity", lambda: euler_violation(pc, rng, 20), 1e-10)
            _run(report, f"{label} alpha={a}: gap nonnegative", lambda: gap_violation(pc, rng, 20), 1e-12)
            if pc.beta >= 2:
                _run(report, f"{label} alpha={a}: pre-safeguard descent at eta=1/L",
                     lambda: descent_violation(pc, 100), 1e-12)
        pc = prepare(ch, 0.5)
        _run(report, f"{label}: Sibson identity and infimum", lambda: sibson_violation(pc, rng, 20), 1e-9)
        _run(report, f"{label}: gamma >= 0", lambda: -obj.gram_gamma(pc), 1e-12)
    return report


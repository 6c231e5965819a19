"""Entropic mirror descent for the Petz-Renyi capacity.

Each iteration takes the exponentiated-gradient step
``p_x <- p_x exp(-eta v_x) / Z`` with ``v = grad S(p)`` and then mixes in the
uniform distribution so every coordinate stays at least ``delta``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .channel import PreparedChannel
from .diagnostics import gap_from_gradient, kl_divergence
from .objective import (
    as_prob,
    capacity_from_S,
    curvature_constants,
    local_smoothness,
    objective_S,
    smoothness_L,
    value_and_gradient,
)
from .spectral import SpectralError

log = logging.getLogger(__name__)

# doubling/halving range of the adaptive line search
ADAPTIVE_K = 30


class SolverError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    alpha: float
    eta: float | Literal["auto"] = "auto"
    delta_floor: float = 1e-11
    tol: float = 1e-8
    max_iters: int = 30000
    stepsize_mode: Literal["constant", "adaptive"] = "constant"
    trace_every: int = 0
    seed: int = 0
    init: Literal["uniform", "random"] | np.ndarray = "uniform"
    analysis_delta: float = 1e-3

    def validate(self, n: int) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.eta != "auto" and not (isinstance(self.eta, (int, float)) and self.eta > 0):
            raise ValueError(f"eta must be positive or 'auto', got {self.eta!r}")
        if not 0.0 <= self.delta_floor <= 1.0 / n * (1 + 1e-12):
            raise ValueError(f"delta_floor must lie in [0, 1/n], got {self.delta_floor}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.stepsize_mode not in ("constant", "adaptive"):
            raise ValueError(f"unknown stepsize mode {self.stepsize_mode!r}")
        if self.trace_every < 0:
            raise ValueError("trace_every must be nonnegative")


@dataclass
class TraceRow:
    t: int
    s: float
    gap: float
    eta: float
    kl_step: float
    # S of the exponentiated-gradient point before the floor was applied
    s_pre_safeguard: float


@dataclass
class SolveResult:
    p_final: np.ndarray
    s_final: float
    capacity: float
    iterations: int
    stop_reason: str
    gap_final: float
    trace: list[TraceRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self, log_base: float = math.e) -> dict:
        return {
            "capacity": self.capacity / math.log(log_base),
            "log_base": "e" if log_base == math.e else log_base,
            "s_final": self.s_final,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "gap_final": self.gap_final,
            "p_final": self.p_final.tolist(),
            **self.metadata,
        }


def md_step(ch: PreparedChannel, p, eta: float, grad=None) -> np.ndarray:
    """Exponentiated-gradient update (computed in log space with a max shift)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("md_step needs a strictly positive p")
    if grad is None:
        _, grad = value_and_gradient(ch, p)
    return exp_update(p, grad, eta)


def exp_update(p, grad, eta: float) -> np.ndarray:
    z = np.log(p) - eta * np.asarray(grad, dtype=float)
    w = np.exp(z - z.max())
    return w / w.sum()


def safeguard(p_tilde, delta: float) -> np.ndarray:
    """Mix with uniform: ``(1 - n delta) p + delta``."""
    p_tilde = np.asarray(p_tilde, dtype=float)
    n = p_tilde.size
    if not 0.0 <= delta <= 1.0 / n * (1 + 1e-12):
        raise ValueError(f"delta must lie in [0, 1/n], got {delta}")
    if delta == 0.0:
        return p_tilde.copy()
    return (1.0 - n * delta) * p_tilde + delta


# coordinates below PINNED_FACTOR * delta count as held by the floor
PINNED_FACTOR = 1e3
# relative size of round-off in S; descent tests below this are inconclusive
S_NOISE = 64 * np.finfo(float).eps


def bregman_descent_test(s_new, s_old, grad, p_new, p_old, eta, pinned=0.0):
    """Relative-smoothness descent test ``S+ <= S + <g, p+ - p> + KL(p+||p)/eta``.

    KL terms of coordinates at or below ``pinned`` (in either point) are left
    out of the model, which only makes the test stricter. Returns True/False,
    or None when the model term is below the round-off level of ``S`` and the
    comparison carries no information.
    """
    free = np.minimum(p_new, p_old) > pinned
    model = kl_divergence(p_new[free], p_old[free]) / eta
    if model <= S_NOISE * max(1.0, abs(s_old)):
        return None
    excess = s_new - s_old - float(grad @ (p_new - p_old))
    return bool(excess <= model + 4 * np.finfo(float).eps * max(1.0, abs(s_old)))


def gradient_descent_test(grad_new, grad_old, p_new, p_old, eta, pinned=0.0) -> bool:
    """Gradient form ``<g+ - g, p+ - p> <= KL(p+||p) / eta``.

    For convex S the left side bounds ``S+ - S - <g, p+ - p>`` from above,
    so passing this implies the relative-smoothness descent test. It compares
    gradient differences instead of nearly equal values of S.
    """
    free = np.minimum(p_new, p_old) > pinned
    lhs = float((grad_new - grad_old) @ (p_new - p_old))
    return bool(lhs <= kl_divergence(p_new[free], p_old[free]) / eta)


def adaptive_stepsize(ch, p, s, grad, eta_base, eta_fallback, delta=0.0, K=ADAPTIVE_K):
    """Largest ``eta_base * 2**k`` (``|k| <= K``) passing the descent test.

    The test is applied to the floored iterate ``safeguard(p_tilde, delta)``;
    on the raw exponentiated-gradient point a coordinate sitting at the floor
    contributes about ``delta / eta`` of spurious slack to the KL term. Near
    the optimum, where S differences drop to round-off, the sufficient
    gradient form of the test decides instead.

    Returns ``(eta, p_tilde, s_tilde)``. Steps are never shrunk below
    ``eta_fallback`` (normally ``1/L``, valid by construction).
    """

    def trial(eta):
        q = exp_update(p, grad, eta)
        qf = safeguard(q, delta)
        sf, gf = value_and_gradient(ch, qf)
        ok = bregman_descent_test(sf, s, grad, qf, p, eta, PINNED_FACTOR * delta)
        if ok is None:
            # round-off regime: decide with the gradient form
            ok = gradient_descent_test(gf, grad, qf, p, eta, PINNED_FACTOR * delta)
        sq = sf if delta == 0.0 else objective_S(ch, q)
        return q, sq, ok

    q, sq, ok = trial(eta_base)
    if ok:
        eta = eta_base
        for _ in range(K):
            q2, sq2, ok2 = trial(2 * eta)
            if not ok2:
                break
            eta, q, sq = 2 * eta, q2, sq2
        return eta, q, sq
    eta = eta_base
    for _ in range(K):
        eta /= 2
        if eta <= eta_fallback:
            break
        q, sq, ok = trial(eta)
        if ok:
            return eta, q, sq
    q = exp_update(p, grad, eta_fallback)
    return eta_fallback, q, objective_S(ch, q)


def _initial_point(cfg: SolverConfig, n: int) -> np.ndarray:
    if isinstance(cfg.init, str):
        if cfg.init == "uniform":
            return np.full(n, 1.0 / n)
        if cfg.init == "random":
            rng = np.random.default_rng(cfg.seed)
            return safeguard(rng.dirichlet(np.ones(n)), cfg.delta_floor)
        raise ValueError(f"unknown init {cfg.init!r}")
    return as_prob(cfg.init, n)


def _step_constant(ch: PreparedChannel, cfg: SolverConfig) -> float:
    if cfg.eta != "auto":
        return float(cfg.eta)
    if ch.beta >= 2.0:
        return 1.0 / smoothness_L(ch)
    if cfg.delta_floor <= 0:
        raise ValueError("eta='auto' with alpha > 1/2 needs delta_floor > 0")
    return 1.0 / smoothness_L(ch, cfg.delta_floor)


def solve(ch: PreparedChannel, cfg: SolverConfig) -> SolveResult:
    """Minimise ``S`` over the simplex and report the capacity.

    Stops as soon as the duality gap falls to ``cfg.tol`` or after
    ``cfg.max_iters`` updates.
    """
    if abs(ch.alpha - cfg.alpha) > 0:
        raise ValueError(f"channel prepared at alpha={ch.alpha}, config has {cfg.alpha}")
    n = ch.n
    cfg.validate(n)
    eta0 = _step_constant(ch, cfg)
    adaptive = cfg.stepsize_mode == "adaptive"

    p = _initial_point(cfg, n)
    p_prev = None
    eta_t = eta0
    s_pre = float("nan")
    trace: list[TraceRow] = []
    t = 0
    while True:
        try:
            s, grad = value_and_gradient(ch, p)
        except SpectralError as exc:
            raise SolverError(f"iteration {t}: {exc}") from exc
        gap = gap_from_gradient(p, grad).gap
        done = gap <= cfg.tol
        if cfg.trace_every and (t % cfg.trace_every == 0 or done or t == cfg.max_iters):
            kl_step = kl_divergence(p, p_prev) if p_prev is not None else 0.0
            trace.append(TraceRow(t, s, gap, eta_t, kl_step, s_pre))
        if done or t >= cfg.max_iters:
            break
        if adaptive:
            eta_safe = eta0 if cfg.eta != "auto" else 1.0 / local_smoothness(ch, p)
            eta_t, p_tilde, s_pre = adaptive_stepsize(
                ch, p, s, grad, max(eta_t, eta_safe), eta_safe, cfg.delta_floor
            )
        else:
            p_tilde = exp_update(p, grad, eta_t)
            if cfg.trace_every:
                s_pre = objective_S(ch, p_tilde)
        p_prev = p
        p = safeguard(p_tilde, cfg.delta_floor)
        t += 1

    stop = "tolerance" if gap <= cfg.tol else "max_iters"
    if stop == "max_iters":
        log.info("alpha=%g: hit max_iters=%d with gap %.3g", cfg.alpha, cfg.max_iters, gap)
    metadata = {"alpha": cfg.alpha, "eta_base": eta0, "delta_floor": cfg.delta_floor,
                "stepsize_mode": cfg.stepsize_mode}
    if n > 1:
        metadata["constants"] = curvature_constants(
            ch, min(cfg.analysis_delta, 1.0 / n)
        ).as_dict()
    return SolveResult(
        p_final=p,
        s_final=s,
        capacity=capacity_from_S(cfg.alpha, s),
        iterations=t,
        stop_reason=stop,
        gap_final=gap,
        trace=trace,
        metadata=metadata,
    )

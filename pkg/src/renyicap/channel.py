"""Classical-quantum channels: validation, generators and JSON file I/O.

A channel maps each input letter ``x`` to a density operator ``W_x``.
States are stored as one complex array of shape ``(n, d, d)``.

Random instances use :func:`numpy.random.default_rng` (PCG64) seeded from a
single integer, so the same seed always gives the same channel.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import hermitian, min_eigenvalue, psd_power

PSD_TOL = 1e-10
TRACE_TOL = 1e-10


class ChannelError(ValueError):
    """Invalid channel data (bad shape, non-density state, singular output)."""


@dataclass(frozen=True)
class CqChannel:
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 3 or states.shape[1] != states.shape[2]:
            raise ChannelError(f"states must have shape (n, d, d), got {states.shape}")
        if states.shape[0] < 1 or states.shape[1] < 1:
            raise ChannelError("need at least one input letter and dimension >= 1")
        states = np.stack([hermitian(w) for w in states])
        for x, w in enumerate(states):
            lam = np.linalg.eigvalsh(w)
            if lam[0] < -PSD_TOL:
                raise ChannelError(f"state {x} is not PSD (min eigenvalue {lam[0]:.3g})")
            tr = np.trace(w).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise ChannelError(f"state {x} has trace {tr:.12g}, expected 1")
        lam_min = min_eigenvalue(states.sum(axis=0))
        if lam_min <= 0:
            raise ChannelError(
                f"non-singularity violated: lambda_min(sum_x W_x) = {lam_min:.3g}"
            )
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    @property
    def alphabet_size(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True)
class PreparedChannel:
    """A channel together with the powers ``A_x = W_x**alpha``."""

    base: CqChannel
    alpha: float
    beta: float
    powers: np.ndarray = field(repr=False)
    a_sum_min_eig: float

    @property
    def n(self) -> int:
        return self.base.alphabet_size

    @property
    def dim(self) -> int:
        return self.base.dim


def prepare(channel: CqChannel, alpha: float) -> PreparedChannel:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    powers = np.stack([psd_power(w, alpha, tol=PSD_TOL) for w in channel.states])
    powers.flags.writeable = False
    lam_min = min_eigenvalue(powers.sum(axis=0))
    if lam_min <= 0:
        raise ChannelError(f"non-singularity violated: lambda_min(sum_x A_x) = {lam_min:.3g}")
    return PreparedChannel(channel, alpha, 1.0 / alpha, powers, lam_min)


def gen_random_channel(n: int, d: int, epsilon: float = 1e-2, seed: int = 0) -> CqChannel:
    """Random noncommuting channel ``W_x = (1-eps) rho_x + eps I/d``.

    Each ``rho_x = G G^H / Tr[G G^H]`` with ``G`` a ``d x d`` matrix of
    i.i.d. standard complex Gaussians.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    states = np.empty((n, d, d), dtype=complex)
    eye = np.eye(d)
    for x in range(n):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        states[x] = (1.0 - epsilon) * rho + epsilon * eye / d
    return CqChannel(states)


def gen_noiseless_channel(n: int) -> CqChannel:
    if n < 1:
        raise ValueError("n must be >= 1")
    states = np.zeros((n, n, n), dtype=complex)
    for x in range(n):
        states[x, x, x] = 1.0
    return CqChannel(states)


def gen_commuting_channel(P) -> CqChannel:
    """Diagonal channel ``W_x = diag(P[x, :])`` from a row-stochastic matrix."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise ValueError("P must be a 2-d array")
    if np.any(P < 0):
        raise ChannelError("P has negative entries")
    if not np.allclose(P.sum(axis=1), 1.0, rtol=0, atol=TRACE_TOL):
        raise ChannelError("rows of P must sum to 1")
    if np.any(P.sum(axis=0) <= 0):
        raise ChannelError("non-singularity violated: P has an all-zero column")
    states = np.zeros((P.shape[0], P.shape[1], P.shape[1]), dtype=complex)
    idx = np.arange(P.shape[1])
    states[:, idx, idx] = P
    return CqChannel(states)


def random_stochastic_matrix(n: int, k: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(k), size=n)


# -- file format ------------------------------------------------------------

def _num(v: float) -> str:
    return format(float(v), ".17e")


def dumps_channel(channel: CqChannel) -> str:
    rows = []
    for w in channel.states:
        mat = ",\n    ".join(
            "[" + ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row) + "]"
            for row in w
        )
        rows.append("[\n    " + mat + "\n  ]")
    return (
        "{\n"
        f'  "alphabet_size": {channel.alphabet_size},\n'
        f'  "dim": {channel.dim},\n'
        '  "states": [\n  ' + ",\n  ".join(rows) + "\n  ]\n}\n"
    )


def loads_channel(text: str) -> CqChannel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelError(f"malformed channel file: {exc}") from exc
    try:
        n = int(doc["alphabet_size"])
        d = int(doc["dim"])
        raw = doc["states"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelError(f"malformed channel file: {exc!r}") from exc
    if n < 1 or d < 1:
        raise ChannelError(f"alphabet_size and dim must be >= 1 (got n={n}, d={d})")
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (n, d, d, 2):
        raise ChannelError(f"states array has shape {arr.shape}, expected {(n, d, d, 2)}")
    return CqChannel(arr[..., 0] + 1j * arr[..., 1])


def save_channel(channel: CqChannel, path) -> None:
    Path(path).write_text(dumps_channel(channel), encoding="utf-8")


def load_channel(path) -> CqChannel:
    return loads_channel(Path(path).read_text(encoding="utf-8"))

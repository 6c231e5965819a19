"""Hermitian linear algebra: eigendecomposition, spectral powers, traces."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

# eigenvalues at or below this are treated as zero
EIG_FLOOR = 1e-14


class SpectralError(ArithmeticError):
    """Eigensolver failure or a spectral power outside its domain."""


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u, lam = self.eigenvectors, self.eigenvalues
        return (u * lam) @ u.conj().T


def hermitian(a) -> np.ndarray:
    """Return ``(a + a^H) / 2`` as a complex square array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    return 0.5 * (a + a.conj().T)


def eigh(a) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = hermitian(a)
    try:
        lam, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        try:
            cond = np.linalg.cond(a)
        except np.linalg.LinAlgError:
            cond = float("inf")
        raise SpectralError(
            f"eigensolver did not converge (dim={a.shape[0]}, cond~{cond:.3g})"
        ) from exc
    return SpectralDecomposition(lam, u)


def _is_nonneg_int(t) -> bool:
    return float(t).is_integer() and t >= 0


def apply_spectral(dec: SpectralDecomposition, values) -> np.ndarray:
    u = dec.eigenvectors
    return hermitian((u * values) @ u.conj().T)


def matrix_power(a, t: float) -> np.ndarray:
    """``U diag(lam**t) U^H`` for Hermitian ``a``.

    Fractional or negative ``t`` requires every eigenvalue to exceed
    ``EIG_FLOOR``.
    """
    dec = eigh(a)
    lam = dec.eigenvalues
    if not _is_nonneg_int(t):
        bad = lam[lam <= EIG_FLOOR]
        if bad.size:
            raise SpectralError(
                f"eigenvalue {bad[0]:.3g} <= {EIG_FLOOR:g} not allowed for power {t}"
            )
        return apply_spectral(dec, lam**t)
    return apply_spectral(dec, lam ** int(t))


def psd_power(a, t: float, tol: float = 1e-10) -> np.ndarray:
    """Positive power of a PSD matrix; round-off eigenvalues in [-tol, 0) clamp to 0."""
    if t <= 0:
        raise ValueError("psd_power needs t > 0")
    dec = eigh(a)
    lam = dec.eigenvalues
    if lam[0] < -tol:
        raise SpectralError(f"matrix is not PSD: eigenvalue {lam[0]:.3g}")
    return apply_spectral(dec, np.clip(lam, 0.0, None) ** t)


def trace_product(a, b) -> float:
    """Real part of ``Tr[a b]`` for Hermitian ``a``, ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # Tr[AB] = sum_ij A_ij B_ji
    tr = np.sum(a * b.T)
    scale = max(1.0, float(np.abs(a).max(initial=0.0) * np.abs(b).max(initial=0.0)) * a.shape[0])
    if abs(tr.imag) > 1e-10 * scale:
        raise ValueError(f"Tr[AB] has imaginary part {tr.imag:.3g}; inputs not Hermitian?")
    return float(tr.real)


def frobenius_norm_sq(a) -> float:
    a = np.asarray(a)
    return float(np.sum(np.abs(a) ** 2))


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(hermitian(a))[0])

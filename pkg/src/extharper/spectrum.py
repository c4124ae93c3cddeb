"""Dense Hermitian eigendecomposition and ground-state extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Gaps below this are treated as degenerate: perturbative susceptibilities
# built on such gaps are flagged unreliable instead of blowing up.
DEGENERACY_TOL = 1e-10

_RESIDUAL_RTOL = 1e-9


class ComputationError(RuntimeError):
    """Numerical failure: eigensolver breakdown or a diverging estimate."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass
class EigenSystem:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_bound: float

    @property
    def size(self) -> int:
        return int(self.eigenvalues.shape[0])


@dataclass
class GroundState:
    energy: float
    amplitudes: np.ndarray
    gap: float
    near_degenerate: bool


def diagonalize(h: np.ndarray, check_hermitian: bool = True) -> EigenSystem:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvector phases are fixed by rotating the largest-modulus component
    onto the positive real axis, so repeated runs serialize identically.
    The worst-case residual max_g ||H v_g - E_g v_g||_2 is computed and
    checked against 1e-9 * max(1, |E_min|, |E_max|).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise ValueError("expected a nonempty square matrix")
    if check_hermitian and not np.array_equal(h, h.conj().T):
        raise ValueError("matrix is not exactly Hermitian")
    try:
        evals, evecs = scipy.linalg.eigh(h, driver="evr", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ComputationError(f"eigensolver failed to converge: {exc}") from exc
    lead = evecs[np.abs(evecs).argmax(axis=0), np.arange(evecs.shape[1])]
    evecs = evecs * np.conj(lead / np.abs(lead))
    residual = h @ evecs - evecs * evals
    bound = float(np.linalg.norm(residual, axis=0).max())
    scale = max(1.0, abs(float(evals[0])), abs(float(evals[-1])))
    if bound > _RESIDUAL_RTOL * scale:
        raise ComputationError(
            f"eigendecomposition residual {bound:.3e} exceeds "
            f"{_RESIDUAL_RTOL:.0e} * {scale:.3g}",
            residual=bound,
        )
    return EigenSystem(evals, np.ascontiguousarray(evecs), bound)


def ground_state(es: EigenSystem) -> GroundState:
    """Lowest eigenpair plus the spectral gap to the first excited state."""
    if es.size < 2:
        raise ValueError("need at least two levels to define a gap")
    evals = es.eigenvalues
    gap = float(evals[1] - evals[0])
    return GroundState(
        energy=float(evals[0]),
        amplitudes=es.eigenvectors[:, 0].copy(),
        gap=gap,
        near_degenerate=gap < DEGENERACY_TOL,
    )

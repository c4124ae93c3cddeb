"""Ground-state overlap fidelity, the parameter-space metric tensor, and
fidelity susceptibility along a direction, plus a finite-difference oracle.

The metric is the second-order response of the ground state to (lam, mu)
shifts; contracting it with a unit direction gives chi_F.  The off-diagonal
entry keeps only the real part of the perturbative sum: the imaginary part
is antisymmetric and cancels in the quadratic form anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Driving, ModelPoint, build_driving, build_hamiltonian
from .spectrum import (
    DEGENERACY_TOL,
    ComputationError,
    EigenSystem,
    GroundState,
    diagonalize,
    ground_state,
)

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit tangent (n_lam, n_mu) of a path through the (lam, mu) plane."""

    n_lam: float
    n_mu: float

    def __post_init__(self):
        if abs(self.n_lam**2 + self.n_mu**2 - 1.0) > _UNIT_TOL:
            raise ValueError("direction must be a unit vector")

    @classmethod
    def of(cls, n_lam: float, n_mu: float) -> "Direction":
        """Build a unit direction from unnormalized components."""
        norm = math.hypot(n_lam, n_mu)
        if norm == 0.0:
            raise ValueError("direction components are both zero")
        return cls(n_lam / norm, n_mu / norm)

    def __neg__(self) -> "Direction":
        return Direction(-self.n_lam, -self.n_mu)


@dataclass
class MetricTensor:
    """Real symmetric 2x2 metric over (lam, mu); reliable is False when the
    ground state was nearly degenerate and terms had to be dropped."""

    g: np.ndarray
    reliable: bool


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, GroundState):
        return state.amplitudes
    return np.asarray(state)


def fidelity(a, b) -> float:
    """|<a|b>| for two ground states (or raw amplitude vectors).

    Symmetric in its arguments and invariant under global phases of either
    state.  States of different length are rejected: fidelity between
    different chain sizes is undefined.
    """
    va = _amplitudes(a)
    vb = _amplitudes(b)
    if va.shape != vb.shape:
        raise ValueError(f"state lengths differ: {va.shape} vs {vb.shape}")
    return min(float(np.abs(np.vdot(va, vb))), 1.0)


def metric_from_drivings(
    es: EigenSystem,
    h_lam: np.ndarray,
    h_mu: np.ndarray,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> MetricTensor:
    """Perturbative metric from an eigensystem and both driving matrices.

    Sums |excited><excited| couplings of the ground state weighted by the
    inverse squared gaps; excited states closer than degeneracy_tol are
    excluded and the result flagged unreliable.
    """
    if es.size < 2:
        raise ValueError("need at least two levels")
    evecs = es.eigenvectors
    v0 = evecs[:, 0]
    denom = es.eigenvalues[1:] - es.eigenvalues[0]
    keep = denom >= degeneracy_tol
    a = evecs[:, 1:].conj().T @ (h_lam @ v0)
    b = evecs[:, 1:].conj().T @ (h_mu @ v0)
    w = np.zeros_like(denom)
    w[keep] = 1.0 / denom[keep] ** 2
    g_ll = float(np.sum(np.abs(a) ** 2 * w))
    g_mm = float(np.sum(np.abs(b) ** 2 * w))
    g_lm = float(np.sum((a * np.conj(b)).real * w))
    g = np.array([[g_ll, g_lm], [g_lm, g_mm]])
    return MetricTensor(g=g, reliable=bool(np.all(keep)))


def metric_tensor(
    p: ModelPoint, es: EigenSystem, degeneracy_tol: float = DEGENERACY_TOL
) -> MetricTensor:
    """Metric at a model point, building its driving matrices on the fly."""
    return metric_from_drivings(
        es,
        build_driving(p, Driving.LAMBDA),
        build_driving(p, Driving.MU),
        degeneracy_tol,
    )


def fidelity_susceptibility(metric: MetricTensor, direction: Direction) -> float:
    """Quadratic form chi_F = n.g.n, clamped to zero within rounding."""
    g = metric.g
    chi = (
        g[0, 0] * direction.n_lam**2
        + 2.0 * g[0, 1] * direction.n_lam * direction.n_mu
        + g[1, 1] * direction.n_mu**2
    )
    if chi < 0.0:
        scale = max(1.0, float(np.abs(g).max()))
        if chi < -1e-10 * scale:
            raise ComputationError(f"metric quadratic form is negative: {chi}")
        chi = 0.0
    return float(chi)


def susceptibility_at(p: ModelPoint, direction: Direction, es: EigenSystem | None = None):
    """(chi_F, reliable) at a point; diagonalizes unless given an EigenSystem."""
    if es is None:
        es = diagonalize(build_hamiltonian(p))
    mt = metric_tensor(p, es)
    return fidelity_susceptibility(mt, direction), mt.reliable


def fs_finite_difference(
    p: ModelPoint,
    direction: Direction,
    dq: float = 1e-4,
    centered: bool = True,
) -> float:
    """Susceptibility from the overlap of two nearby ground states.

    Independent of the perturbative route: diagonalizes at the two ends of
    a short parameter step and returns -2 ln F / dq^2.  The default centered
    variant straddles p symmetrically and converges at second order in dq;
    centered=False steps forward from p instead.
    """
    if not 1e-6 <= dq <= 1e-2:
        raise ValueError(f"dq must lie in [1e-6, 1e-2], got {dq}")
    offsets = (-0.5 * dq, 0.5 * dq) if centered else (0.0, dq)
    states = []
    for off in offsets:
        lam = p.lam + off * direction.n_lam
        mu = p.mu + off * direction.n_mu
        if lam < 0.0 or mu < 0.0:
            raise ValueError("finite-difference step leaves the valid parameter region")
        q = ModelPoint(lam, mu, p.approximant, p.ky)
        states.append(ground_state(diagonalize(build_hamiltonian(q))))
    f = fidelity(states[0], states[1])
    if f == 0.0:
        raise ComputationError("vanishing overlap; -2 ln F diverges")
    return -2.0 * math.log(f) / dq**2

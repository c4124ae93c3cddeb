"""Construction of the extended Harper chain and its parameter derivatives.

The chain has N sites with on-site energies -lam*cos(2*pi*phi*n + ky) and
hopping amplitudes -(1 + mu*exp(i*(2*pi*phi*(n + 1/2) - ky))) from site n to
site n+1, closed periodically.  The flux phi is a rational approximant built
from successive Fibonacci numbers, phi = F(m-1)/F(m), with the chain length
locked to N = F(m) so the modulation is commensurate with the ring.

All phase arguments are reduced with exact integer arithmetic before any
cos/exp call, so matrices come out exactly Hermitian and the wrap-around
entries carry the same phase formula as the bulk bonds.
"""

from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass

import numpy as np

# F(m) for m > _MAX_INDEX would overflow the int64 products used for exact
# phase reduction (num * 2N must stay below 2**63).
_MAX_INDEX = 45

_TWO_PI = 2.0 * math.pi


class Driving(enum.Enum):
    """Which model parameter a driving (derivative) matrix belongs to."""

    LAMBDA = "lambda"
    MU = "mu"


@dataclass(frozen=True)
class FibonacciApproximant:
    """Rational flux phi = f_m_minus_1/f_m with chain size N = f_m."""

    m: int
    f_m: int
    f_m_minus_1: int
    residue: int

    @property
    def size(self) -> int:
        return self.f_m

    @property
    def flux(self) -> float:
        return self.f_m_minus_1 / self.f_m


def fibonacci_approximant(m: int) -> FibonacciApproximant:
    """Return the m-th approximant of the golden-mean flux (F0 = F1 = 1)."""
    idx = operator.index(m)
    if idx < 2:
        raise ValueError(f"approximant index must be >= 2, got {idx}")
    if idx > _MAX_INDEX:
        raise OverflowError(
            f"approximant index {idx} exceeds {_MAX_INDEX}; the site count "
            "would overflow the 64-bit phase arithmetic"
        )
    prev, cur = 1, 1
    for _ in range(idx - 1):
        prev, cur = cur, prev + cur
    return FibonacciApproximant(m=idx, f_m=cur, f_m_minus_1=prev, residue=idx % 3)


@dataclass(frozen=True)
class ModelPoint:
    """One point of the model: couplings (lam, mu), momentum ky, chain size.

    lam and mu are the diagonal and hopping modulation strengths in units of
    the bare hop; both must be finite and non-negative.  ky is wrapped into
    [0, 2*pi).
    """

    lam: float
    mu: float
    approximant: FibonacciApproximant
    ky: float = 0.0

    def __post_init__(self):
        lam = float(self.lam)
        mu = float(self.mu)
        ky = float(self.ky)
        if not (math.isfinite(lam) and lam >= 0.0):
            raise ValueError(f"lam must be finite and >= 0, got {lam}")
        if not (math.isfinite(mu) and mu >= 0.0):
            raise ValueError(f"mu must be finite and >= 0, got {mu}")
        if not math.isfinite(ky):
            raise ValueError(f"ky must be finite, got {ky}")
        ky = math.fmod(ky, _TWO_PI)
        if ky < 0.0:
            ky += _TWO_PI
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "ky", ky)

    @property
    def size(self) -> int:
        return self.approximant.f_m


def model_point(lam: float, mu: float, m: int, ky: float = 0.0) -> ModelPoint:
    """Convenience constructor taking the approximant index directly."""
    return ModelPoint(lam, mu, fibonacci_approximant(m), ky)


def _site_angles(approx: FibonacciApproximant, ky: float) -> np.ndarray:
    n = np.arange(approx.f_m, dtype=np.int64)
    reduced = (approx.f_m_minus_1 * n) % approx.f_m
    return _TWO_PI * reduced / approx.f_m + ky


def _bond_angles(approx: FibonacciApproximant, ky: float) -> np.ndarray:
    # phase of the n -> n+1 hop, evaluated at the half-integer midpoint
    n = np.arange(approx.f_m, dtype=np.int64)
    reduced = (approx.f_m_minus_1 * (2 * n + 1)) % (2 * approx.f_m)
    return math.pi * reduced / approx.f_m - ky


def bond_coefficients(p: ModelPoint) -> np.ndarray:
    """Hop amplitude entering H from site n to (n+1) mod N, for every n."""
    return -(1.0 + p.mu * np.exp(1j * _bond_angles(p.approximant, p.ky)))


def _place_bonds(h: np.ndarray, coeffs: np.ndarray, periodic: bool) -> None:
    n = h.shape[0]
    i = np.arange(n - 1)
    # accumulate instead of assign: on the N = 2 ring the bulk bond and the
    # wrap-around bond couple the same pair of sites
    h[i, i + 1] += coeffs[:-1]
    h[i + 1, i] += np.conj(coeffs[:-1])
    if periodic:
        h[n - 1, 0] += coeffs[-1]
        h[0, n - 1] += np.conj(coeffs[-1])


def build_hamiltonian(p: ModelPoint, periodic: bool = True) -> np.ndarray:
    """Dense N x N Hamiltonian at a model point; exactly Hermitian.

    Nonzeros sit on the diagonal, the two neighbouring diagonals, and (for
    the periodic ring) the two wrap-around corners.
    """
    n = p.size
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = p.lam * (-np.cos(_site_angles(p.approximant, p.ky)))
    _place_bonds(h, bond_coefficients(p), periodic)
    return h


def build_driving(p: ModelPoint, kind: Driving, periodic: bool = True) -> np.ndarray:
    """Derivative of the Hamiltonian with respect to lam or mu.

    The lam driving is the bare cosine diagonal, the mu driving the bare
    phase-modulated hopping; both are independent of (lam, mu) themselves,
    so H(lam, mu) = H(0, 0) + lam*H_lam + mu*H_mu holds entrywise.
    """
    n = p.size
    h = np.zeros((n, n), dtype=complex)
    if kind is Driving.LAMBDA:
        h[np.diag_indices(n)] = -np.cos(_site_angles(p.approximant, p.ky))
    elif kind is Driving.MU:
        _place_bonds(h, -np.exp(1j * _bond_angles(p.approximant, p.ky)), periodic)
    else:
        raise TypeError(f"kind must be a Driving member, got {kind!r}")
    return h


def zero_bond_site(p: ModelPoint, tol: float = 1e-12) -> int | None:
    """Site n whose outgoing bond amplitude vanishes, or None.

    At mu = 1 and N = F(m) with m = 3l+1 (ky = 0) the bond from (N-1)/2 to
    its successor is exactly zero and the ring opens into a chain; for any
    other combination every bond stays finite.
    """
    amp = np.abs(bond_coefficients(p))
    i = int(np.argmin(amp))
    return i if amp[i] < tol else None

"""Localization diagnostics: site-resolved binary entropies and IPR.

An amplitude vector defines occupations z_n = |psi_n|^2.  Site n carries the
binary entropy of z_n, in bits; the site average is rescaled by (1/N) log2 N
so extended states score near 1 and localized states near 0.  Per-site
values are left unscaled.  IPR follows the sum-of-squares convention
sum_n z_n^2: 1/N for a uniform state, 1 for a delta state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import EigenSystem

_NORM_TOL = 1e-10


def binary_entropy(z) -> np.ndarray:
    """Elementwise -z log2 z - (1-z) log2(1-z) with 0 log 0 := 0."""
    z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
    out = np.zeros_like(z)
    inner = (z > 0.0) & (z < 1.0)
    zi = z[inner]
    out[inner] = -zi * np.log2(zi) - (1.0 - zi) * np.log2(1.0 - zi)
    return out


@dataclass
class EntropyProfile:
    site_entropies: np.ndarray
    state_entropy_scaled: float
    ipr: float


@dataclass
class SpectrumEntropy:
    value: float
    count: int


def entropy_profile(state) -> EntropyProfile:
    """Per-site entropies, scaled state entropy, and IPR of one state."""
    psi = np.asarray(state)
    if psi.ndim != 1 or psi.shape[0] < 2:
        raise ValueError("state must be a vector of at least two amplitudes")
    z = np.abs(psi) ** 2
    if abs(float(np.sqrt(z.sum())) - 1.0) > _NORM_TOL:
        raise ValueError("state is not normalized")
    sites = binary_entropy(z)
    scaled = float(sites.sum() / np.log2(psi.shape[0]))
    return EntropyProfile(sites, scaled, float(np.sum(z * z)))


def state_entropies(columns) -> np.ndarray:
    """Scaled state entropy of every column of an (N, M) amplitude matrix."""
    z = np.abs(np.asarray(columns)) ** 2
    return binary_entropy(z).sum(axis=0) / np.log2(z.shape[0])


def spectrum_entropy(es: EigenSystem) -> SpectrumEntropy:
    """Scaled state entropy averaged over every eigenstate of a spectrum."""
    vals = state_entropies(es.eigenvectors)
    return SpectrumEntropy(float(vals.mean()), int(vals.shape[0]))


def entropy_vs_energy(es: EigenSystem) -> np.ndarray:
    """(energy, scaled entropy) rows, ascending in energy."""
    return np.column_stack([es.eigenvalues, state_entropies(es.eigenvectors)])

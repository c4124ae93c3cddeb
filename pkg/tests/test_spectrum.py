import numpy as np
import pytest

from extharper import (
    ComputationError,
    EigenSystem,
    build_hamiltonian,
    diagonalize,
    ground_state,
    model_point,
)


def test_two_by_two_analytic():
    es = diagonalize(np.array([[0.0, -1.0], [-1.0, 0.0]], dtype=complex))
    np.testing.assert_allclose(es.eigenvalues, [-1.0, 1.0], atol=1e-14)
    gs = ground_state(es)
    assert gs.energy == pytest.approx(-1.0, abs=1e-14)
    assert gs.gap == pytest.approx(2.0, abs=1e-14)
    assert not gs.near_degenerate


def test_free_ring_spectrum():
    p = model_point(0.0, 0.0, 9)
    es = diagonalize(build_hamiltonian(p))
    n = es.size
    expected = np.sort(-2.0 * np.cos(2.0 * np.pi * np.arange(n) / n))
    np.testing.assert_allclose(es.eigenvalues, expected, atol=1e-12)


def test_eigenvalues_sorted_and_orthonormal(rng):
    es = diagonalize(build_hamiltonian(model_point(1.3, 0.7, 9, ky=0.4)))
    assert np.all(np.diff(es.eigenvalues) >= 0.0)
    overlap = es.eigenvectors.conj().T @ es.eigenvectors
    assert np.abs(overlap - np.eye(es.size)).max() <= 1e-10


def test_residual_bound_invariant():
    es = diagonalize(build_hamiltonian(model_point(2.1, 1.4, 10)))
    scale = max(1.0, abs(es.eigenvalues[0]), abs(es.eigenvalues[-1]))
    assert es.residual_bound <= 1e-9 * scale


def test_reconstruction_small_instances(rng):
    for m in (4, 6, 9):
        lam, mu = rng.uniform(0.2, 3.5), rng.uniform(0.1, 1.8)
        h = build_hamiltonian(model_point(lam, mu, m, ky=rng.uniform(0.0, 6.0)))
        es = diagonalize(h)
        recon = es.eigenvectors @ np.diag(es.eigenvalues) @ es.eigenvectors.conj().T
        assert np.abs(h - recon).max() <= 1e-8


def test_trace_identity(rng):
    h = build_hamiltonian(model_point(2.4, 0.6, 9))
    es = diagonalize(h)
    assert abs(es.eigenvalues.sum() - np.trace(h).real) <= 1e-8 * es.size


def test_phase_convention_deterministic():
    h = build_hamiltonian(model_point(1.1, 0.8, 8, ky=1.0))
    a = diagonalize(h)
    b = diagonalize(h.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    lead = np.abs(a.eigenvectors).argmax(axis=0)
    heads = a.eigenvectors[lead, np.arange(a.size)]
    assert np.all(heads.real > 0.0)
    assert np.abs(heads.imag).max() <= 1e-12


def test_rejects_non_hermitian():
    bad = np.array([[0.0, 1.0], [2.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        diagonalize(bad)


def test_rejects_non_square():
    with pytest.raises(ValueError):
        diagonalize(np.zeros((2, 3), dtype=complex))


def test_ground_state_needs_two_levels():
    es = EigenSystem(np.array([1.0]), np.array([[1.0 + 0j]]), 0.0)
    with pytest.raises(ValueError):
        ground_state(es)


def test_metallic_point_not_near_degenerate(eigensystem_cache):
    gs = ground_state(eigensystem_cache(1.0, 0.5, 15))
    assert gs.gap > 1e-6
    # frozen regression of the first computation
    assert gs.gap == pytest.approx(3.578890042410521e-05, rel=1e-6)
    assert not gs.near_degenerate
    assert abs(np.linalg.norm(gs.amplitudes) - 1.0) <= 1e-12


def test_insulating_point_gap_very_small(eigensystem_cache):
    # deep in the localized phase the edge gap collapses far below the
    # bandwidth (order 1e-5 against a spectrum spanning ~8 energy units)
    es = eigensystem_cache(3.0, 0.75, 15)
    gap = es.eigenvalues[1] - es.eigenvalues[0]
    assert gap < 1e-3
    assert es.eigenvalues[-1] - es.eigenvalues[0] > 1.0


def test_computation_error_carries_residual():
    err = ComputationError("boom", residual=3.0)
    assert err.residual == 3.0
